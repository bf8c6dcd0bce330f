#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "deplearn/errors.hpp"
#include "deplearn/label.hpp"

namespace deplearn {

enum class DepKind : std::uint8_t { accuracy, correlation, conjunction };

inline const char* kind_name(DepKind k) {
  switch (k) {
    case DepKind::accuracy: return "acc";
    case DepKind::correlation: return "cor";
    case DepKind::conjunction: return "and";
  }
  return "?";
}

// A factor template over labeling-function indices and the latent label.
//   accuracy(j):      y * lambda_j
//   correlation(j,k): 1{lambda_j = lambda_k}
//   conjunction(j,k): 1{lambda_j = y and lambda_k = y}
// Pairs are stored with ascending indices; both pairwise factors are
// symmetric in their pair, so the canonical form is unique.
class Dependency {
 public:
  static Dependency accuracy(int j) {
    check_index(j);
    return Dependency(DepKind::accuracy, j, kNone);
  }
  static Dependency correlation(int j, int k) { return pair(DepKind::correlation, j, k); }
  static Dependency conjunction(int j, int k) { return pair(DepKind::conjunction, j, k); }

  DepKind kind() const { return kind_; }
  int arity() const { return kind_ == DepKind::accuracy ? 1 : 2; }
  int member(int i) const { return members_[i]; }
  int max_index() const { return arity() == 1 ? members_[0] : members_[1]; }

  bool involves_lf(int j) const {
    return members_[0] == j || (arity() == 2 && members_[1] == j);
  }
  // Accuracy and conjunction factors reference the latent label.
  bool involves_label() const { return kind_ != DepKind::correlation; }
  // For pairwise deps, the member that is not j.
  int other_member(int j) const { return members_[0] == j ? members_[1] : members_[0]; }

  std::string to_string() const {
    std::string s = kind_name(kind_);
    s += "(" + std::to_string(members_[0]);
    if (arity() == 2) s += "," + std::to_string(members_[1]);
    s += ")";
    return s;
  }

  friend auto operator<=>(const Dependency&, const Dependency&) = default;

 private:
  static constexpr std::int32_t kNone = -1;
  Dependency(DepKind k, std::int32_t a, std::int32_t b) : kind_(k), members_{a, b} {}
  static void check_index(int j) {
    if (j < 0) throw ValidationError("labeling-function index must be >= 0");
  }
  static Dependency pair(DepKind k, int j, int l) {
    check_index(j);
    check_index(l);
    if (j == l)
      throw ValidationError("pairwise dependency needs two distinct indices");
    return Dependency(k, std::min(j, l), std::max(j, l));
  }

  DepKind kind_;
  std::array<std::int32_t, 2> members_;
};

// Finite association from Dependency to a real weight theta.
class ParameterSet {
 public:
  ParameterSet() = default;

  void set(const Dependency& dep, double weight) {
    if (!std::isfinite(weight))
      throw ValidationError("weight for " + dep.to_string() + " is not finite");
    weights_[dep] = weight;
  }

  double at(const Dependency& dep) const {
    auto it = weights_.find(dep);
    if (it == weights_.end())
      throw ValidationError("no parameter for dependency " + dep.to_string());
    return it->second;
  }

  const double* find(const Dependency& dep) const {
    auto it = weights_.find(dep);
    return it == weights_.end() ? nullptr : &it->second;
  }

  bool contains(const Dependency& dep) const { return weights_.count(dep) > 0; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }

  auto begin() const { return weights_.begin(); }
  auto end() const { return weights_.end(); }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::map<Dependency, double> weights_;  // ordered: deterministic iteration
};

// Factor evaluation; always in {-1, 0, 1}.
inline int factor_value(const Dependency& dep, LabelRow row, TrueLabel y) {
  const int n = static_cast<int>(row.size());
  if (dep.max_index() >= n)
    throw ValidationError("dependency " + dep.to_string() +
                          " references index out of range for n=" + std::to_string(n));
  switch (dep.kind()) {
    case DepKind::accuracy:
      return y.value() * row[dep.member(0)].value();
    case DepKind::correlation:
      return row[dep.member(0)] == row[dep.member(1)] ? 1 : 0;
    case DepKind::conjunction:
      return (row[dep.member(0)].value() == y.value() &&
              row[dep.member(1)].value() == y.value())
                 ? 1
                 : 0;
  }
  return 0;
}

// A dependency list plus a weight for each; defines an unnormalized joint
// over (lambda-row, y) with log-weight = sum theta * factor. Immutable.
class GenerativeModel {
 public:
  GenerativeModel(int n, ParameterSet params)
      : n_(n), params_(std::move(params)) {
    if (n_ < 1) throw ValidationError("model needs n >= 1");
    for (const auto& [dep, w] : params_) {
      (void)w;
      if (dep.max_index() >= n_)
        throw ValidationError("dependency " + dep.to_string() +
                              " out of range for n=" + std::to_string(n_));
    }
  }

  int n() const { return n_; }
  const ParameterSet& params() const { return params_; }

  double log_weight(LabelRow row, TrueLabel y) const {
    if (static_cast<int>(row.size()) != n_)
      throw ValidationError("row length " + std::to_string(row.size()) +
                            " does not match model n=" + std::to_string(n_));
    double s = 0.0;
    for (const auto& [dep, w] : params_) s += w * factor_value(dep, row, y);
    return s;
  }

 private:
  int n_;
  ParameterSet params_;
};

// All candidate dependencies of the requested kinds over n labeling
// functions, in canonical order: accuracies ascending, then correlation
// pairs lexicographic, then conjunction pairs lexicographic.
inline std::vector<Dependency> enumerate_candidates(int n,
                                                    const std::set<DepKind>& kinds) {
  if (n < 2) throw ValidationError("candidate enumeration needs n >= 2");
  if (kinds.empty()) throw ValidationError("candidate enumeration needs at least one kind");
  std::vector<Dependency> out;
  if (kinds.count(DepKind::accuracy))
    for (int j = 0; j < n; ++j) out.push_back(Dependency::accuracy(j));
  if (kinds.count(DepKind::correlation))
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) out.push_back(Dependency::correlation(j, k));
  if (kinds.count(DepKind::conjunction))
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) out.push_back(Dependency::conjunction(j, k));
  return out;
}

// The dependencies visible to subproblem j: everything that involves either
// lambda_j or the latent label y. Candidate order is preserved.
struct Neighborhood {
  int owner = 0;
  std::vector<Dependency> deps;
};

inline Neighborhood neighborhood(const std::vector<Dependency>& candidates, int j) {
  if (j < 0) throw ValidationError("neighborhood owner index must be >= 0");
  Neighborhood nb;
  nb.owner = j;
  for (const auto& dep : candidates)
    if (dep.involves_label() || dep.involves_lf(j)) nb.deps.push_back(dep);
  return nb;
}

// Exact probability table over all (lambda-row, y) configurations.
// lambda index is base-3 little-endian (digit k = lambda_k + 1);
// y index 0 -> -1, 1 -> +1.
struct JointTable {
  int n = 0;
  std::vector<double> probs;  // size 2 * 3^n, [y_idx * 3^n + lambda_idx]

  double prob(long lambda_idx, int y_idx) const {
    return probs[static_cast<std::size_t>(y_idx) * (probs.size() / 2) + lambda_idx];
  }

  std::vector<double> lambda_marginal() const {
    const std::size_t half = probs.size() / 2;
    std::vector<double> m(half);
    for (std::size_t i = 0; i < half; ++i) m[i] = probs[i] + probs[half + i];
    return m;
  }
};

inline long pow3(int n) {
  long p = 1;
  for (int i = 0; i < n; ++i) p *= 3;
  return p;
}

inline std::vector<Label> decode_lambda(long idx, int n) {
  std::vector<Label> row(n);
  for (int k = 0; k < n; ++k) {
    row[k] = Label(static_cast<int>(idx % 3) - 1);
    idx /= 3;
  }
  return row;
}

inline long encode_lambda(LabelRow row) {
  long idx = 0, base = 1;
  for (std::size_t k = 0; k < row.size(); ++k) {
    idx += (row[k].value() + 1) * base;
    base *= 3;
  }
  return idx;
}

// Brute-force enumeration over the 3^n * 2 support; n <= 8 keeps the table
// at most 13122 entries.
inline JointTable joint_table(const GenerativeModel& model) {
  if (model.n() > 8)
    throw ValidationError("joint_table enumeration is limited to n <= 8, got n=" +
                          std::to_string(model.n()));
  const long configs = pow3(model.n());
  JointTable table;
  table.n = model.n();
  table.probs.resize(static_cast<std::size_t>(2 * configs));
  double max_lw = -HUGE_VAL;
  for (int yi = 0; yi < 2; ++yi) {
    const TrueLabel y(yi == 0 ? -1 : 1);
    for (long li = 0; li < configs; ++li) {
      const auto row = decode_lambda(li, model.n());
      const double lw = model.log_weight(row, y);
      table.probs[static_cast<std::size_t>(yi) * configs + li] = lw;
      max_lw = std::max(max_lw, lw);
    }
  }
  double z = 0.0;
  for (double& p : table.probs) {
    p = std::exp(p - max_lw);
    z += p;
  }
  for (double& p : table.probs) p /= z;
  return table;
}

}  // namespace deplearn
