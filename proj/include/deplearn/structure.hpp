#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <thread>
#include <vector>

#include "deplearn/errors.hpp"
#include "deplearn/label.hpp"
#include "deplearn/model.hpp"
#include "deplearn/pseudolikelihood.hpp"
#include "deplearn/rng.hpp"

namespace deplearn {

enum class TruncMode { periodic, final_only };

struct LearnerConfig {
  double epsilon = 0.1;          // threshold and regularization strength
  std::optional<double> step;    // eta; defaults to 1/m
  int epochs = 10;
  int trunc_every = 10;          // K
  double init_accuracy = 1.0;    // theta0 for accuracy deps
  double init_other = 0.0;       // theta0 for everything else
  TruncMode trunc_mode = TruncMode::periodic;
  bool shuffle = false;          // fixed row order unless set
  std::uint64_t seed = 0;
  std::optional<double> select_threshold;  // defaults to epsilon

  void validate() const {
    if (!(epsilon > 0)) throw ValidationError("epsilon must be > 0");
    if (step && !(*step > 0)) throw ValidationError("step must be > 0");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (trunc_every < 1) throw ValidationError("trunc_every must be >= 1");
  }
};

// Shrink toward zero by `amount`, clamping at zero; never flips sign.
inline double truncate(double theta, double amount) {
  if (theta > 0) return std::max(0.0, theta - amount);
  if (theta < 0) return std::min(0.0, theta + amount);
  return 0.0;
}

struct TraceEntry {
  int j;
  int epoch;
  Dependency dep;
  double theta;
};

struct StructureResult {
  std::set<Dependency> selected;
  std::map<int, ParameterSet> per_lf_params;
};

inline std::vector<Dependency> canonicalize(std::vector<Dependency> deps) {
  std::sort(deps.begin(), deps.end());
  deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
  return deps;
}

inline void require_canonical(const std::vector<Dependency>& candidates) {
  if (!std::is_sorted(candidates.begin(), candidates.end()) ||
      std::adjacent_find(candidates.begin(), candidates.end()) != candidates.end())
    throw ValidationError("candidate list must be in canonical order without duplicates");
}

namespace learn_detail {

constexpr double kDivergenceBound = 50.0;

inline void check_finite(const std::vector<double>& theta, int j, int epoch) {
  for (double t : theta)
    if (!std::isfinite(t) || std::fabs(t) > kDivergenceBound)
      throw DivergenceError("structure learning diverged in subproblem j=" +
                            std::to_string(j) + " at epoch " + std::to_string(epoch));
}

}  // namespace learn_detail

// One subproblem of the structure learner: SGD on the l1-regularized
// marginal pseudolikelihood of labeling function j, with the online
// truncated gradient. Only the neighborhood Phi_j is instantiated; the
// objective is independent of every other parameter.
inline ParameterSet learn_neighborhood(const LabelMatrix& data, int j,
                                       const std::vector<Dependency>& candidates,
                                       const LearnerConfig& cfg,
                                       std::vector<TraceEntry>* trace = nullptr) {
  cfg.validate();
  require_canonical(candidates);
  if (j < 0 || j >= data.cols())
    throw ValidationError("subproblem index j=" + std::to_string(j) +
                          " out of range for n=" + std::to_string(data.cols()));

  const Neighborhood nbhd = neighborhood(candidates, j);
  const std::size_t d = nbhd.deps.size();
  std::vector<double> theta(d);
  for (std::size_t a = 0; a < d; ++a)
    theta[a] = nbhd.deps[a].kind() == DepKind::accuracy ? cfg.init_accuracy
                                                        : cfg.init_other;

  const long m = data.rows();
  const double eta = cfg.step ? *cfg.step : 1.0 / static_cast<double>(m);
  const long k_trunc = cfg.trunc_every;
  const double trunc_amount = k_trunc * eta * cfg.epsilon;
  std::vector<double> grad(d);
  std::vector<int> order(m);
  for (long i = 0; i < m; ++i) order[i] = static_cast<int>(i);
  auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(j));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      for (long i = m - 1; i > 0; --i)
        std::swap(order[i], order[uniform_below(rng, i + 1)]);
    }
    for (long i = 0; i < m; ++i) {
      const LabelRow row = data.row(order[i]);
      plik::grad_row(nbhd.deps, theta, row, j, grad.data());
      for (std::size_t a = 0; a < d; ++a) theta[a] -= eta * grad[a];
      const long step_count = static_cast<long>(epoch) * m + i + 1;
      if (cfg.trunc_mode == TruncMode::periodic && step_count % k_trunc == 0) {
        for (std::size_t a = 0; a < d; ++a) theta[a] = truncate(theta[a], trunc_amount);
        learn_detail::check_finite(theta, j, epoch);
      }
    }
    if (trace)
      for (std::size_t a = 0; a < d; ++a)
        trace->push_back(TraceEntry{j, epoch, nbhd.deps[a], theta[a]});
  }

  // Selection happens after the loop, so it must never see a value that a
  // scheduled truncation would have removed.
  const long total_steps = static_cast<long>(cfg.epochs) * m;
  if (cfg.trunc_mode == TruncMode::final_only || total_steps % k_trunc != 0)
    for (std::size_t a = 0; a < d; ++a) theta[a] = truncate(theta[a], trunc_amount);
  learn_detail::check_finite(theta, j, cfg.epochs - 1);

  ParameterSet out;
  for (std::size_t a = 0; a < d; ++a) out.set(nbhd.deps[a], theta[a]);
  return out;
}

// Dependencies whose member tuple contains j and whose final magnitude
// strictly exceeds epsilon.
inline std::set<Dependency> select(const ParameterSet& params, int j,
                                   double epsilon) {
  std::set<Dependency> out;
  for (const auto& [dep, w] : params)
    if (dep.involves_lf(j) && std::fabs(w) > epsilon) out.insert(dep);
  return out;
}

// Full structure learning: one subproblem per labeling function, union of
// the selections. Subproblems are independent; scheduling cannot change the
// result.
inline StructureResult learn_structure(const LabelMatrix& data,
                                       const std::vector<Dependency>& candidates,
                                       const LearnerConfig& cfg, int threads = 1,
                                       std::vector<TraceEntry>* trace = nullptr) {
  cfg.validate();
  require_canonical(candidates);
  if (data.cols() < 2) throw ValidationError("n >= 2 required");
  const int n = data.cols();

  std::vector<ParameterSet> per_j(n);
  std::vector<std::vector<TraceEntry>> traces(trace ? n : 0);
  std::vector<std::exception_ptr> errors(n);

  auto run_range = [&](std::atomic<int>& next) {
    for (int j = next.fetch_add(1); j < n; j = next.fetch_add(1)) {
      try {
        per_j[j] = learn_neighborhood(data, j, candidates, cfg,
                                      trace ? &traces[j] : nullptr);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };

  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    std::atomic<int> next{0};
    run_range(next);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_range, std::ref(next));
    for (auto& t : pool) t.join();
  }
  for (int j = 0; j < n; ++j)
    if (errors[j]) std::rethrow_exception(errors[j]);

  StructureResult result;
  const double thr = cfg.select_threshold.value_or(cfg.epsilon);
  for (int j = 0; j < n; ++j) {
    auto sel = select(per_j[j], j, thr);
    result.selected.insert(sel.begin(), sel.end());
    result.per_lf_params.emplace(j, std::move(per_j[j]));
  }
  if (trace)
    for (auto& tj : traces)
      trace->insert(trace->end(), tj.begin(), tj.end());
  return result;
}

// Model over the selected dependencies; each weight comes from the owning
// subproblem with the largest final magnitude (ties to the lower index).
inline GenerativeModel result_model(const StructureResult& result, int n) {
  ParameterSet params;
  for (const auto& dep : result.selected) {
    double best = 0.0;
    bool found = false;
    for (int i = 0; i < dep.arity(); ++i) {
      const auto it = result.per_lf_params.find(dep.member(i));
      if (it == result.per_lf_params.end()) continue;
      if (const double* w = it->second.find(dep)) {
        if (!found || std::fabs(*w) > std::fabs(best)) best = *w;
        found = true;
      }
    }
    if (found) params.set(dep, best);
  }
  return GenerativeModel(n, std::move(params));
}

}  // namespace deplearn
