#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "deplearn/errors.hpp"

namespace deplearn {

// A labeling-function output: -1 (false), 0 (abstain), +1 (true).
class Label {
 public:
  constexpr Label() : v_(0) {}
  explicit Label(int v) : v_(static_cast<std::int8_t>(v)) {
    if (v < -1 || v > 1)
      throw ValidationError("label value must be in {-1,0,1}, got " +
                            std::to_string(v));
  }
  int value() const { return v_; }
  bool abstains() const { return v_ == 0; }
  friend bool operator==(Label a, Label b) { return a.v_ == b.v_; }
  friend bool operator!=(Label a, Label b) { return a.v_ != b.v_; }

 private:
  std::int8_t v_;
};

// The latent class label: -1 or +1, never abstain.
class TrueLabel {
 public:
  explicit TrueLabel(int v) : v_(static_cast<std::int8_t>(v)) {
    if (v != -1 && v != 1)
      throw ValidationError("true label must be -1 or +1, got " +
                            std::to_string(v));
  }
  int value() const { return v_; }
  TrueLabel flipped() const { return TrueLabel(-v_); }
  friend bool operator==(TrueLabel a, TrueLabel b) { return a.v_ == b.v_; }

 private:
  std::int8_t v_;
};

using LabelRow = std::span<const Label>;

// Dense m x n grid of labeling-function outputs; the only observed data.
// Immutable after construction.
class LabelMatrix {
 public:
  LabelMatrix(int rows, int cols, std::vector<Label> cells)
      : rows_(rows), cols_(cols), cells_(std::move(cells)) {
    if (rows_ < 1) throw ValidationError("label matrix needs at least 1 row");
    if (cols_ < 1)
      throw ValidationError("label matrix needs at least 1 column");
    if (cells_.size() != static_cast<std::size_t>(rows_) * cols_)
      throw ValidationError("label matrix cell count mismatch");
  }

  static LabelMatrix from_ints(const std::vector<std::vector<int>>& grid) {
    if (grid.empty()) throw ValidationError("label matrix needs at least 1 row");
    const int n = static_cast<int>(grid.front().size());
    std::vector<Label> cells;
    cells.reserve(grid.size() * n);
    for (const auto& r : grid) {
      if (static_cast<int>(r.size()) != n)
        throw ValidationError("ragged label matrix");
      for (int v : r) cells.emplace_back(v);
    }
    return LabelMatrix(static_cast<int>(grid.size()), n, std::move(cells));
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Label at(int i, int j) const {
    return cells_[static_cast<std::size_t>(i) * cols_ + j];
  }
  LabelRow row(int i) const {
    return LabelRow(cells_.data() + static_cast<std::size_t>(i) * cols_,
                    static_cast<std::size_t>(cols_));
  }

  friend bool operator==(const LabelMatrix& a, const LabelMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.cells_ == b.cells_;
  }

 private:
  int rows_, cols_;
  std::vector<Label> cells_;
};

}  // namespace deplearn
