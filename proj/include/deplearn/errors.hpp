#pragma once

#include <stdexcept>
#include <string>

namespace deplearn {

// Error taxonomy maps onto CLI exit codes: validation -> 1, divergence -> 2, io -> 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments, malformed structures, capacity guards.
struct ValidationError : Error {
  using Error::Error;
};

// Non-finite or runaway parameters during learning.
struct DivergenceError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace deplearn
