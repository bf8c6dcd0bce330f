#pragma once

// Test-only oracles: brute-force enumeration, finite differences, a Jacobi
// eigensolver, and small random-model generators. Everything here is kept
// independent of the implementation paths it checks.

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "deplearn/label.hpp"
#include "deplearn/model.hpp"
#include "deplearn/pseudolikelihood.hpp"
#include "deplearn/rng.hpp"

namespace testutil {

using namespace deplearn;

// P(lambda_j = v, y = u | rest of row), computed from the full model by
// direct enumeration of the 6 substitutions. Uses every factor in the model,
// including ones outside the neighborhood; they must cancel.
inline std::array<double, 6> oracle_conditional(const GenerativeModel& model,
                                                LabelRow row, int j) {
  std::vector<Label> scratch(row.begin(), row.end());
  std::array<double, 6> lw{};
  for (int vi = 0; vi < 3; ++vi) {
    scratch[j] = Label(vi - 1);
    for (int ui = 0; ui < 2; ++ui)
      lw[vi * 2 + ui] = model.log_weight(scratch, TrueLabel(ui == 0 ? -1 : 1));
  }
  double mx = lw[0];
  for (double v : lw) mx = std::max(mx, v);
  std::array<double, 6> p{};
  double z = 0;
  for (int t = 0; t < 6; ++t) z += p[t] = std::exp(lw[t] - mx);
  for (double& v : p) v /= z;
  return p;
}

// (p_neg, p_pos) of y given the full observed row.
inline std::pair<double, double> oracle_posterior(const GenerativeModel& model,
                                                  LabelRow row) {
  const double wn = model.log_weight(row, TrueLabel(-1));
  const double wp = model.log_weight(row, TrueLabel(+1));
  const double mx = std::max(wn, wp);
  const double en = std::exp(wn - mx), ep = std::exp(wp - mx);
  return {en / (en + ep), ep / (en + ep)};
}

inline double oracle_nlpl(const GenerativeModel& model, const LabelMatrix& data,
                          int j) {
  double total = 0;
  for (int i = 0; i < data.rows(); ++i) {
    const auto p = oracle_conditional(model, data.row(i), j);
    const int vi = data.at(i, j).value() + 1;
    total += -std::log(p[vi * 2] + p[vi * 2 + 1]);
  }
  return total;
}

inline std::vector<Label> random_row(std::mt19937_64& rng, int n) {
  std::vector<Label> row(n);
  for (int k = 0; k < n; ++k)
    row[k] = Label(static_cast<int>(uniform_below(rng, 3)) - 1);
  return row;
}

inline LabelMatrix random_matrix(std::mt19937_64& rng, int m, int n) {
  std::vector<Label> cells;
  cells.reserve(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m * n; ++i)
    cells.push_back(Label(static_cast<int>(uniform_below(rng, 3)) - 1));
  return LabelMatrix(m, n, std::move(cells));
}

// Model with every candidate of the given kinds, weights uniform in
// [wlo, whi].
inline GenerativeModel random_model(std::mt19937_64& rng, int n,
                                    const std::set<DepKind>& kinds, double wlo,
                                    double whi) {
  ParameterSet params;
  for (const auto& dep : enumerate_candidates(n, kinds))
    params.set(dep, wlo + (whi - wlo) * uniform01(rng));
  return GenerativeModel(n, std::move(params));
}

// Central finite difference of a scalar function of one parameter.
template <typename F>
double central_diff(F&& f, double h = 1e-4) {
  return (f(+h) - f(-h)) / (2 * h);
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-22) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double phi = 0.5 * std::atan2(2 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(phi), s = std::sin(phi);
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
  return eig;
}

// Draw m rows of lambda from an exact joint table by CDF inversion;
// independent of the library's samplers.
inline LabelMatrix sample_from_table(const JointTable& table, int m,
                                     std::mt19937_64& rng) {
  const auto marginal = table.lambda_marginal();
  std::vector<double> cdf(marginal.size());
  double acc = 0;
  for (std::size_t i = 0; i < marginal.size(); ++i) cdf[i] = (acc += marginal[i]);
  std::vector<Label> cells;
  cells.reserve(static_cast<std::size_t>(m) * table.n);
  for (int i = 0; i < m; ++i) {
    const double u = uniform01(rng) * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const long idx = it - cdf.begin();
    for (const Label& l : decode_lambda(idx, table.n)) cells.push_back(l);
  }
  return LabelMatrix(m, table.n, std::move(cells));
}

}  // namespace testutil
