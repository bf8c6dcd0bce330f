#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "deplearn/errors.hpp"
#include "deplearn/label.hpp"
#include "deplearn/model.hpp"
#include "deplearn/rng.hpp"

namespace deplearn {

// Ground-truth distribution for the scaling experiments: every labeling
// function gets an accuracy factor, every within-clique pair a correlation.
struct TruthSpec {
  int n = 0;
  std::vector<std::vector<int>> cliques;
  double theta_acc = 1.0;
  double theta_cor = 0.25;
};

inline GenerativeModel build_truth(const TruthSpec& spec) {
  if (spec.n < 1) throw ValidationError("truth spec needs n >= 1");
  ParameterSet params;
  for (int j = 0; j < spec.n; ++j)
    params.set(Dependency::accuracy(j), spec.theta_acc);
  for (const auto& clique : spec.cliques) {
    for (std::size_t a = 0; a < clique.size(); ++a) {
      if (clique[a] < 0 || clique[a] >= spec.n)
        throw ValidationError("clique index " + std::to_string(clique[a]) +
                              " out of range");
      for (std::size_t b = a + 1; b < clique.size(); ++b)
        params.set(Dependency::correlation(clique[a], clique[b]), spec.theta_cor);
    }
  }
  return GenerativeModel(spec.n, std::move(params));
}

// Maximum number of dependencies affecting any one labeling function:
// its accuracy plus every non-accuracy dependency touching it. A labeling
// function inside a clique of size k has degree k; an isolated one has 1.
inline int max_dependency_degree(const GenerativeModel& truth) {
  std::vector<int> degree(truth.n(), 1);
  for (const auto& [dep, w] : truth.params()) {
    (void)w;
    if (dep.kind() == DepKind::accuracy) continue;
    for (int i = 0; i < dep.arity(); ++i) ++degree[dep.member(i)];
  }
  return *std::max_element(degree.begin(), degree.end());
}

// m := ceil(750 * gamma * d_bar * ln n), natural log.
inline long sample_count(double gamma, int d_bar, int n) {
  if (!(gamma > 0)) throw ValidationError("gamma must be > 0");
  if (n < 2) throw ValidationError("sample_count needs n >= 2");
  if (d_bar < 1) throw ValidationError("d_bar must be >= 1");
  return static_cast<long>(std::ceil(750.0 * gamma * d_bar * std::log(n)));
}

struct SampleBudget {
  double gamma;
  int d_bar;
  int n;
  long m;
  SampleBudget(double gamma_, int d_bar_, int n_)
      : gamma(gamma_), d_bar(d_bar_), n(n_), m(sample_count(gamma_, d_bar_, n_)) {}
};

// Random ground truth per the comparison protocol: each unordered pair is
// correlated independently with pair_prob.
inline GenerativeModel random_truth(int n, double pair_prob, double theta_acc,
                                    double theta_cor, std::uint64_t seed) {
  if (pair_prob < 0 || pair_prob > 1)
    throw ValidationError("pair_prob must be in [0,1]");
  auto rng = make_rng(seed);
  ParameterSet params;
  for (int j = 0; j < n; ++j) params.set(Dependency::accuracy(j), theta_acc);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k)
      if (uniform01(rng) < pair_prob)
        params.set(Dependency::correlation(j, k), theta_cor);
  return GenerativeModel(n, std::move(params));
}

namespace synth_detail {

// Connected components of the correlation graph.
inline std::vector<std::vector<int>> correlation_components(
    const GenerativeModel& model) {
  const int n = model.n();
  std::vector<int> parent(n);
  for (int j = 0; j < n; ++j) parent[j] = j;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [dep, w] : model.params()) {
    (void)w;
    if (dep.kind() == DepKind::correlation)
      parent[find(dep.member(0))] = find(dep.member(1));
  }
  std::vector<std::vector<int>> comps(n);
  for (int j = 0; j < n; ++j) comps[find(j)].push_back(j);
  std::erase_if(comps, [](const auto& c) { return c.empty(); });
  return comps;
}

// Per-component sampling tables: CDF over the 3^k member configurations,
// one per value of y. Given y, the joint over lambda factorizes across
// correlation components.
struct ComponentSampler {
  std::vector<int> members;
  std::vector<double> cdf[2];  // indexed by (y+1)/2
};

inline ComponentSampler build_component_sampler(const GenerativeModel& model,
                                                std::vector<int> members) {
  ComponentSampler cs;
  cs.members = std::move(members);
  const int k = static_cast<int>(cs.members.size());
  if (k > 10)
    throw ValidationError(
        "exact sampling supports correlation components of at most 10 labeling "
        "functions, got " + std::to_string(k));
  std::vector<int> pos(model.n(), -1);
  for (int i = 0; i < k; ++i) pos[cs.members[i]] = i;
  const long configs = pow3(k);
  for (int ui = 0; ui < 2; ++ui) {
    const int y = ui == 0 ? -1 : 1;
    std::vector<double> lw(configs, 0.0);
    for (long c = 0; c < configs; ++c) {
      long idx = c;
      std::vector<int> vals(k);
      for (int i = 0; i < k; ++i) {
        vals[i] = static_cast<int>(idx % 3) - 1;
        idx /= 3;
      }
      double s = 0.0;
      for (const auto& [dep, w] : model.params()) {
        if (dep.kind() == DepKind::accuracy) {
          if (pos[dep.member(0)] >= 0) s += w * y * vals[pos[dep.member(0)]];
        } else if (dep.kind() == DepKind::correlation) {
          const int a = pos[dep.member(0)], b = pos[dep.member(1)];
          if (a >= 0 && b >= 0 && vals[a] == vals[b]) s += w;
        }
      }
      lw[c] = s;
    }
    const double mx = *std::max_element(lw.begin(), lw.end());
    cs.cdf[ui].resize(configs);
    double acc = 0.0;
    for (long c = 0; c < configs; ++c)
      cs.cdf[ui][c] = (acc += std::exp(lw[c] - mx));
  }
  return cs;
}

}  // namespace synth_detail

// Exact sampler for accuracy+correlation models: y is uniform on {-1,+1}
// (negating accuracy weights mirrors lambda, so the two y branches carry
// equal mass), and given y the row factorizes over correlation components,
// each small enough to enumerate. Row i consumes the stream derived from
// (seed, i): one draw for y, then one per component in ascending order.
inline LabelMatrix sample_exact(const GenerativeModel& model, long m,
                                std::uint64_t seed) {
  if (m < 1) throw ValidationError("sample count must be >= 1");
  for (const auto& [dep, w] : model.params()) {
    (void)w;
    if (dep.kind() == DepKind::conjunction)
      throw ValidationError(
          "exact sampling supports only accuracy and correlation dependencies; "
          "use the Gibbs sampler for this model");
  }
  auto comps = synth_detail::correlation_components(model);
  std::sort(comps.begin(), comps.end());
  std::vector<synth_detail::ComponentSampler> samplers;
  samplers.reserve(comps.size());
  for (auto& c : comps)
    samplers.push_back(synth_detail::build_component_sampler(model, std::move(c)));

  const int n = model.n();
  std::vector<Label> cells(static_cast<std::size_t>(m) * n);
  for (long i = 0; i < m; ++i) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(i));
    const int ui = uniform01(rng) < 0.5 ? 0 : 1;
    for (const auto& cs : samplers) {
      const auto& cdf = cs.cdf[ui];
      const double u = uniform01(rng) * cdf.back();
      long c = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
      for (int t = 0; t < static_cast<int>(cs.members.size()); ++t) {
        cells[static_cast<std::size_t>(i) * n + cs.members[t]] =
            Label(static_cast<int>(c % 3) - 1);
        c /= 3;
      }
    }
  }
  return LabelMatrix(static_cast<int>(m), n, std::move(cells));
}

// General fallback: one independent Gibbs chain per row over (lambda, y).
// Sweep order: lambda_0 .. lambda_{n-1}, then y.
inline LabelMatrix sample_gibbs(const GenerativeModel& model, long m,
                                int burn_in, std::uint64_t seed) {
  if (m < 1) throw ValidationError("sample count must be >= 1");
  if (burn_in < 1) throw ValidationError("burn_in must be >= 1");
  const int n = model.n();

  // adjacency: factors touching each lambda_j; y-coupled factors
  struct Adj {
    std::vector<std::pair<Dependency, double>> deps;
  };
  std::vector<Adj> lf_adj(n);
  std::vector<std::pair<Dependency, double>> y_adj;
  for (const auto& [dep, w] : model.params()) {
    for (int i = 0; i < dep.arity(); ++i) lf_adj[dep.member(i)].deps.push_back({dep, w});
    if (dep.involves_label()) y_adj.push_back({dep, w});
  }

  std::vector<Label> cells(static_cast<std::size_t>(m) * n);
  std::vector<int> lam(n);
  for (long i = 0; i < m; ++i) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(i));
    for (int j = 0; j < n; ++j)
      lam[j] = static_cast<int>(uniform_below(rng, 3)) - 1;
    int y = uniform01(rng) < 0.5 ? -1 : 1;
    for (int sweep = 0; sweep < burn_in; ++sweep) {
      for (int j = 0; j < n; ++j) {
        double e[3];
        for (int vi = 0; vi < 3; ++vi) {
          const int v = vi - 1;
          double s = 0.0;
          for (const auto& [dep, w] : lf_adj[j].deps) {
            switch (dep.kind()) {
              case DepKind::accuracy:
                s += w * y * v;
                break;
              case DepKind::correlation:
                if (v == lam[dep.other_member(j)]) s += w;
                break;
              case DepKind::conjunction:
                if (v == y && lam[dep.other_member(j)] == y) s += w;
                break;
            }
          }
          e[vi] = s;
        }
        const double mx = std::max({e[0], e[1], e[2]});
        const double w0 = std::exp(e[0] - mx), w1 = std::exp(e[1] - mx),
                     w2 = std::exp(e[2] - mx);
        const double u = uniform01(rng) * (w0 + w1 + w2);
        lam[j] = u < w0 ? -1 : (u < w0 + w1 ? 0 : 1);
      }
      double ey[2] = {0.0, 0.0};
      for (const auto& [dep, w] : y_adj) {
        for (int ui = 0; ui < 2; ++ui) {
          const int u = ui == 0 ? -1 : 1;
          if (dep.kind() == DepKind::accuracy) {
            ey[ui] += w * u * lam[dep.member(0)];
          } else {
            if (lam[dep.member(0)] == u && lam[dep.member(1)] == u) ey[ui] += w;
          }
        }
      }
      const double mx = std::max(ey[0], ey[1]);
      const double w0 = std::exp(ey[0] - mx), w1 = std::exp(ey[1] - mx);
      y = uniform01(rng) * (w0 + w1) < w0 ? -1 : 1;
    }
    for (int j = 0; j < n; ++j)
      cells[static_cast<std::size_t>(i) * n + j] = Label(lam[j]);
  }
  return LabelMatrix(static_cast<int>(m), n, std::move(cells));
}

// Appends `copies` identical duplicates of one fresh random column:
// abstain with abstain_prob, otherwise a fair coin.
inline LabelMatrix augment_catastrophe(const LabelMatrix& data, int copies,
                                       double abstain_prob, std::uint64_t seed) {
  if (copies < 1) throw ValidationError("copies must be >= 1");
  if (abstain_prob < 0 || abstain_prob > 1)
    throw ValidationError("abstain_prob must be in [0,1]");
  auto rng = make_rng(seed);
  std::vector<Label> column(data.rows());
  for (int i = 0; i < data.rows(); ++i) {
    const double u = uniform01(rng);
    if (u < abstain_prob) column[i] = Label(0);
    else column[i] = Label(uniform01(rng) < 0.5 ? -1 : 1);
  }
  const int n_out = data.cols() + copies;
  std::vector<Label> cells(static_cast<std::size_t>(data.rows()) * n_out);
  for (int i = 0; i < data.rows(); ++i) {
    for (int j = 0; j < data.cols(); ++j)
      cells[static_cast<std::size_t>(i) * n_out + j] = data.at(i, j);
    for (int c = 0; c < copies; ++c)
      cells[static_cast<std::size_t>(i) * n_out + data.cols() + c] = column[i];
  }
  return LabelMatrix(data.rows(), n_out, std::move(cells));
}

}  // namespace deplearn
