#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "deplearn/errors.hpp"
#include "deplearn/label.hpp"
#include "deplearn/model.hpp"

namespace deplearn {

// Per-row conditional over (lambda_j, y) given the rest of the row,
// indexed by [lambda_j + 1][(y + 1) / 2].
struct ConditionalTable {
  double probs[3][2] = {{0, 0}, {0, 0}, {0, 0}};
  double prob(int lambda_value, int y_value) const {
    return probs[lambda_value + 1][(y_value + 1) / 2];
  }
};

struct PosteriorLabel {
  double p_pos = 0.5;
  double p_neg = 0.5;
};

// Aligned with the owning Neighborhood's dependency order.
using GradientVector = std::vector<double>;

namespace plik {

// Cell layout for the 6 (lambda_j, y) configurations.
inline constexpr int cell(int vi, int ui) { return vi * 2 + ui; }

// Unnormalized log-weights of the 6 substitutions (lambda_j <- v, y <- u),
// keeping only neighborhood factors; factors that touch neither lambda_j nor
// y are constants in the conditional and cancel. The exponent splits into a
// v-only part (correlations with j), a u-only part (accuracies and
// conjunctions away from j), and a cross part (factors containing j and y).
inline void conditional_logweights(std::span<const Dependency> deps,
                                   std::span<const double> theta, LabelRow row,
                                   int j, double out[6]) {
  double by_u[2] = {0, 0};
  double by_v[3] = {0, 0, 0};
  double cross[6] = {0, 0, 0, 0, 0, 0};
  for (std::size_t d = 0; d < deps.size(); ++d) {
    const Dependency& dep = deps[d];
    const double w = theta[d];
    switch (dep.kind()) {
      case DepKind::accuracy: {
        const int k = dep.member(0);
        if (k == j) {
          cross[cell(2, 1)] += w;  // (+1,+1)
          cross[cell(0, 0)] += w;  // (-1,-1)
          cross[cell(2, 0)] -= w;  // (+1,-1)
          cross[cell(0, 1)] -= w;  // (-1,+1)
        } else if (const int c = row[k].value()) {
          by_u[1] += w * c;
          by_u[0] -= w * c;
        }
        break;
      }
      case DepKind::correlation: {
        if (dep.involves_lf(j))
          by_v[row[dep.other_member(j)].value() + 1] += w;
        // else: constant in both v and u, cancels
        break;
      }
      case DepKind::conjunction: {
        if (dep.involves_lf(j)) {
          const int c = row[dep.other_member(j)].value();
          if (c != 0) cross[cell(c + 1, (c + 1) / 2)] += w;
        } else {
          const int a = row[dep.member(0)].value();
          if (a != 0 && a == row[dep.member(1)].value()) by_u[(a + 1) / 2] += w;
        }
        break;
      }
    }
  }
  for (int vi = 0; vi < 3; ++vi)
    for (int ui = 0; ui < 2; ++ui)
      out[cell(vi, ui)] = by_u[ui] + by_v[vi] + cross[cell(vi, ui)];
}

inline void softmax6(const double lw[6], double out[6]) {
  double mx = lw[0];
  for (int t = 1; t < 6; ++t) mx = std::max(mx, lw[t]);
  double z = 0.0;
  for (int t = 0; t < 6; ++t) z += out[t] = std::exp(lw[t] - mx);
  for (int t = 0; t < 6; ++t) out[t] /= z;
}

// p(y | full observed row); correlation factors are y-independent and cancel.
inline void posterior_probs(std::span<const Dependency> deps,
                            std::span<const double> theta, LabelRow row,
                            double out[2]) {
  double w[2] = {0, 0};
  for (std::size_t d = 0; d < deps.size(); ++d) {
    const Dependency& dep = deps[d];
    switch (dep.kind()) {
      case DepKind::accuracy: {
        if (const int c = row[dep.member(0)].value()) {
          w[1] += theta[d] * c;
          w[0] -= theta[d] * c;
        }
        break;
      }
      case DepKind::conjunction: {
        const int a = row[dep.member(0)].value();
        if (a != 0 && a == row[dep.member(1)].value()) w[(a + 1) / 2] += theta[d];
        break;
      }
      case DepKind::correlation:
        break;
    }
  }
  const double mx = std::max(w[0], w[1]);
  const double e0 = std::exp(w[0] - mx), e1 = std::exp(w[1] - mx);
  out[0] = e0 / (e0 + e1);
  out[1] = e1 / (e0 + e1);
}

// One row's negative log marginal pseudolikelihood:
// -log sum_u p(lambda_j = observed, y = u | rest).
inline double nlpl_row(std::span<const Dependency> deps,
                       std::span<const double> theta, LabelRow row, int j) {
  double lw[6];
  conditional_logweights(deps, theta, row, j, lw);
  double mx = lw[0];
  for (int t = 1; t < 6; ++t) mx = std::max(mx, lw[t]);
  double z_all = 0.0;
  for (int t = 0; t < 6; ++t) z_all += std::exp(lw[t] - mx);
  const int vi = row[j].value() + 1;
  const double z_obs =
      std::exp(lw[cell(vi, 0)] - mx) + std::exp(lw[cell(vi, 1)] - mx);
  return std::log(z_all) - std::log(z_obs);
}

// Exact per-row gradient: entry = alpha - beta, with alpha the expectation
// of the factor under the 6-point conditional and beta under the posterior
// over y at the observed row. Every entry lands in [-2, 2].
inline void grad_row(std::span<const Dependency> deps,
                     std::span<const double> theta, LabelRow row, int j,
                     double* grad) {
  double lw[6], t6[6], post[2];
  conditional_logweights(deps, theta, row, j, lw);
  softmax6(lw, t6);
  posterior_probs(deps, theta, row, post);

  // marginals of the 6-point table
  const double mv[3] = {t6[cell(0, 0)] + t6[cell(0, 1)],
                        t6[cell(1, 0)] + t6[cell(1, 1)],
                        t6[cell(2, 0)] + t6[cell(2, 1)]};
  const double mu[2] = {t6[cell(0, 0)] + t6[cell(1, 0)] + t6[cell(2, 0)],
                        t6[cell(0, 1)] + t6[cell(1, 1)] + t6[cell(2, 1)]};
  const double mean_uv = t6[cell(2, 1)] + t6[cell(0, 0)] - t6[cell(2, 0)] -
                         t6[cell(0, 1)];
  const double mean_u_cond = mu[1] - mu[0];
  const double mean_u_post = post[1] - post[0];

  for (std::size_t d = 0; d < deps.size(); ++d) {
    const Dependency& dep = deps[d];
    double alpha = 0.0, beta = 0.0;
    switch (dep.kind()) {
      case DepKind::accuracy: {
        const int k = dep.member(0);
        if (k == j) {
          alpha = mean_uv;
          beta = row[j].value() * mean_u_post;
        } else {
          alpha = row[k].value() * mean_u_cond;
          beta = row[k].value() * mean_u_post;
        }
        break;
      }
      case DepKind::correlation: {
        if (dep.involves_lf(j)) {
          const int c = row[dep.other_member(j)].value();
          alpha = mv[c + 1];
          beta = (row[j].value() == c) ? 1.0 : 0.0;
        }
        // else: factor is a constant on this row; alpha == beta == constant
        break;
      }
      case DepKind::conjunction: {
        if (dep.involves_lf(j)) {
          const int c = row[dep.other_member(j)].value();
          if (c != 0) {
            alpha = t6[cell(c + 1, (c + 1) / 2)];
            if (row[j].value() == c) beta = post[(c + 1) / 2];
          }
        } else {
          const int a = row[dep.member(0)].value();
          if (a != 0 && a == row[dep.member(1)].value()) {
            alpha = mu[(a + 1) / 2];
            beta = post[(a + 1) / 2];
          }
        }
        break;
      }
    }
    grad[d] = alpha - beta;
  }
}

// Flattened weights for a neighborhood; throws if any dependency lacks a
// parameter.
inline std::vector<double> align_theta(const std::vector<Dependency>& deps,
                                       const ParameterSet& params) {
  std::vector<double> theta;
  theta.reserve(deps.size());
  for (const auto& dep : deps) theta.push_back(params.at(dep));
  return theta;
}

inline void check_row(std::span<const Dependency> deps, LabelRow row, int j) {
  const int n = static_cast<int>(row.size());
  if (j < 0 || j >= n)
    throw ValidationError("subproblem index " + std::to_string(j) +
                          " out of range for row length " + std::to_string(n));
  for (const auto& dep : deps)
    if (dep.max_index() >= n)
      throw ValidationError("dependency " + dep.to_string() +
                            " out of range for row length " + std::to_string(n));
}

}  // namespace plik

inline ConditionalTable conditional_joint(const Neighborhood& nbhd,
                                          const ParameterSet& params,
                                          LabelRow row, int j) {
  plik::check_row(nbhd.deps, row, j);
  const auto theta = plik::align_theta(nbhd.deps, params);
  double lw[6], p[6];
  plik::conditional_logweights(nbhd.deps, theta, row, j, lw);
  plik::softmax6(lw, p);
  ConditionalTable table;
  for (int vi = 0; vi < 3; ++vi)
    for (int ui = 0; ui < 2; ++ui) table.probs[vi][ui] = p[plik::cell(vi, ui)];
  return table;
}

inline PosteriorLabel posterior_label(const std::vector<Dependency>& deps,
                                      const ParameterSet& params, LabelRow row) {
  const auto theta = plik::align_theta(deps, params);
  for (const auto& dep : deps)
    if (dep.max_index() >= static_cast<int>(row.size()))
      throw ValidationError("dependency " + dep.to_string() + " out of range");
  double post[2];
  plik::posterior_probs(deps, theta, row, post);
  return PosteriorLabel{post[1], post[0]};
}

// Negative log marginal pseudolikelihood of labeling function j over the
// whole matrix (unregularized; the l1 term belongs to the learner).
inline double nlpl(const Neighborhood& nbhd, const ParameterSet& params,
                   const LabelMatrix& data, int j) {
  plik::check_row(nbhd.deps, data.row(0), j);
  const auto theta = plik::align_theta(nbhd.deps, params);
  double total = 0.0;
  for (int i = 0; i < data.rows(); ++i)
    total += plik::nlpl_row(nbhd.deps, theta, data.row(i), j);
  if (!std::isfinite(total))
    throw DivergenceError("nlpl accumulation became non-finite for j=" +
                          std::to_string(j));
  return total;
}

inline GradientVector grad_datapoint(const Neighborhood& nbhd,
                                     const ParameterSet& params, LabelRow row,
                                     int j) {
  plik::check_row(nbhd.deps, row, j);
  const auto theta = plik::align_theta(nbhd.deps, params);
  GradientVector grad(nbhd.deps.size());
  plik::grad_row(nbhd.deps, theta, row, j, grad.data());
  return grad;
}

// Exact Hessian of the nlpl: sum over rows of
// Cov(Phi_j | rest of row) - Cov(Phi_j | full row), from the 6-point and
// 2-point conditional distributions. Diagnostic only; the learner is
// first-order.
inline std::vector<std::vector<double>> hessian_estimate(
    const Neighborhood& nbhd, const ParameterSet& params,
    const LabelMatrix& data, int j) {
  plik::check_row(nbhd.deps, data.row(0), j);
  const auto theta = plik::align_theta(nbhd.deps, params);
  const std::size_t d = nbhd.deps.size();
  std::vector<std::vector<double>> hess(d, std::vector<double>(d, 0.0));
  std::vector<double> f(d * 6), g(d * 2), mean6(d), mean2(d);
  std::vector<Label> scratch(data.cols());

  for (int i = 0; i < data.rows(); ++i) {
    const LabelRow row = data.row(i);
    double lw[6], t6[6], post[2];
    plik::conditional_logweights(nbhd.deps, theta, row, j, lw);
    plik::softmax6(lw, t6);
    plik::posterior_probs(nbhd.deps, theta, row, post);

    // factor values under the 6 substitutions and at the observed row
    for (int k = 0; k < data.cols(); ++k) scratch[k] = row[k];
    for (int vi = 0; vi < 3; ++vi) {
      scratch[j] = Label(vi - 1);
      for (int ui = 0; ui < 2; ++ui) {
        const TrueLabel u(ui == 0 ? -1 : 1);
        for (std::size_t a = 0; a < d; ++a)
          f[a * 6 + plik::cell(vi, ui)] = factor_value(nbhd.deps[a], scratch, u);
      }
    }
    scratch[j] = row[j];
    for (int ui = 0; ui < 2; ++ui) {
      const TrueLabel u(ui == 0 ? -1 : 1);
      for (std::size_t a = 0; a < d; ++a)
        g[a * 2 + ui] = factor_value(nbhd.deps[a], scratch, u);
    }

    for (std::size_t a = 0; a < d; ++a) {
      double m6 = 0.0;
      for (int t = 0; t < 6; ++t) m6 += t6[t] * f[a * 6 + t];
      mean6[a] = m6;
      mean2[a] = post[0] * g[a * 2] + post[1] * g[a * 2 + 1];
    }
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) {
        double e6 = 0.0;
        for (int t = 0; t < 6; ++t) e6 += t6[t] * f[a * 6 + t] * f[b * 6 + t];
        const double e2 = post[0] * g[a * 2] * g[b * 2] +
                          post[1] * g[a * 2 + 1] * g[b * 2 + 1];
        const double v = (e6 - mean6[a] * mean6[b]) - (e2 - mean2[a] * mean2[b]);
        hess[a][b] += v;
        if (b != a) hess[b][a] += v;
      }
    }
  }
  return hess;
}

}  // namespace deplearn
