#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>

#include "deplearn/synthetic.hpp"
#include "helpers.hpp"

using namespace deplearn;

namespace {

// Total variation between the empirical lambda distribution and the exact
// lambda marginal of a joint table.
double empirical_tv(const LabelMatrix& data, const JointTable& table) {
  const auto marginal = table.lambda_marginal();
  std::vector<double> counts(marginal.size(), 0.0);
  for (int i = 0; i < data.rows(); ++i) counts[encode_lambda(data.row(i))] += 1.0;
  double tv = 0.0;
  for (std::size_t c = 0; c < marginal.size(); ++c)
    tv += std::fabs(counts[c] / data.rows() - marginal[c]);
  return tv / 2;
}

// Pearson chi-square goodness-of-fit statistic; cells with expected count
// below 5 are pooled. Returns (statistic, degrees of freedom).
std::pair<double, int> chi_square_gof(const LabelMatrix& data,
                                      const JointTable& table) {
  const auto marginal = table.lambda_marginal();
  std::vector<double> counts(marginal.size(), 0.0);
  for (int i = 0; i < data.rows(); ++i) counts[encode_lambda(data.row(i))] += 1.0;
  double stat = 0.0, pooled_obs = 0.0, pooled_exp = 0.0;
  int cells = 0;
  for (std::size_t c = 0; c < marginal.size(); ++c) {
    const double expected = marginal[c] * data.rows();
    if (expected < 5.0) {
      pooled_obs += counts[c];
      pooled_exp += expected;
      continue;
    }
    stat += (counts[c] - expected) * (counts[c] - expected) / expected;
    ++cells;
  }
  if (pooled_exp > 0) {
    stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  }
  return {stat, cells - 1};
}

int count_kind(const GenerativeModel& m, DepKind kind) {
  int c = 0;
  for (const auto& [dep, w] : m.params()) {
    (void)w;
    if (dep.kind() == kind) ++c;
  }
  return c;
}

}  // namespace

TEST_CASE("build_truth") {
  SECTION("one correlated pair") {
    const auto m = build_truth({4, {{0, 1}}, 1.0, 0.25});
    CHECK(count_kind(m, DepKind::accuracy) == 4);
    CHECK(count_kind(m, DepKind::correlation) == 1);
    CHECK(m.params().at(Dependency::accuracy(2)) == 1.0);
    CHECK(m.params().at(Dependency::correlation(0, 1)) == 0.25);
  }
  SECTION("a triangle clique yields all three pairs") {
    const auto m = build_truth({3, {{0, 1, 2}}, 1.0, 0.25});
    CHECK(count_kind(m, DepKind::correlation) == 3);
  }
  SECTION("no cliques") {
    const auto m = build_truth({2, {}, 1.0, 0.25});
    CHECK(count_kind(m, DepKind::correlation) == 0);
  }
  SECTION("overlapping cliques deduplicate") {
    const auto m = build_truth({4, {{0, 1}, {1, 0, 2}}, 1.0, 0.25});
    CHECK(count_kind(m, DepKind::correlation) == 3);  // (0,1),(0,2),(1,2)
  }
  SECTION("out-of-range clique index") {
    CHECK_THROWS_AS(build_truth({3, {{0, 5}}, 1.0, 0.25}), ValidationError);
  }
}

TEST_CASE("maximum dependency degree") {
  CHECK(max_dependency_degree(build_truth({5, {}, 1.0, 0.25})) == 1);
  CHECK(max_dependency_degree(build_truth({5, {{0, 1}}, 1.0, 0.25})) == 2);
  CHECK(max_dependency_degree(build_truth({6, {{0, 1, 2}, {3, 4}}, 1.0, 0.25})) == 3);
}

TEST_CASE("sample_count evaluates the budget formula") {
  CHECK(sample_count(1.0, 1, 25) == 2415);
  CHECK(sample_count(0.1, 2, 25) == 483);
  CHECK(sample_count(1.0, 2, 25) == 4829);
  // direct evaluation of ceil(750 * gamma * d_bar * ln n)
  CHECK(sample_count(0.7, 3, 42) ==
        static_cast<long>(std::ceil(750.0 * 0.7 * 3 * std::log(42.0))));
  CHECK_THROWS_AS(sample_count(0.0, 1, 25), ValidationError);
  CHECK_THROWS_AS(sample_count(-1.0, 1, 25), ValidationError);

  SECTION("monotone in every argument") {
    CHECK(sample_count(0.5, 2, 25) <= sample_count(0.6, 2, 25));
    CHECK(sample_count(0.5, 2, 25) <= sample_count(0.5, 3, 25));
    CHECK(sample_count(0.5, 2, 25) <= sample_count(0.5, 2, 30));
  }
  SECTION("budget struct carries the derived m") {
    const SampleBudget b(2.0, 2, 25);
    CHECK(b.m == sample_count(2.0, 2, 25));
  }
}

TEST_CASE("random_truth") {
  CHECK(count_kind(random_truth(6, 0.0, 1.0, 0.25, 1), DepKind::correlation) == 0);
  CHECK(count_kind(random_truth(3, 1.0, 1.0, 0.25, 1), DepKind::correlation) == 3);

  SECTION("deterministic under seed") {
    const auto a = random_truth(10, 0.3, 1.0, 0.25, 42);
    const auto b = random_truth(10, 0.3, 1.0, 0.25, 42);
    CHECK(a.params() == b.params());
  }
  SECTION("expected correlation count matches the binomial mean") {
    double total = 0;
    for (int seed = 0; seed < 200; ++seed)
      total += count_kind(random_truth(50, 0.05, 1.0, 0.25, seed),
                          DepKind::correlation);
    const double mean = total / 200;         // binomial mean 0.05*C(50,2)
    CHECK(mean > 61.25 * 0.9);
    CHECK(mean < 61.25 * 1.1);
  }
}

TEST_CASE("exact sampler matches the enumerated joint") {
  const auto model = build_truth({3, {}, 1.0, 0.25});
  const auto table = joint_table(model);
  const auto data = sample_exact(model, 100000, 5);
  CHECK(empirical_tv(data, table) < 0.01);

  SECTION("lambda marginals are balanced") {
    for (int j = 0; j < 3; ++j) {
      double diff = 0;
      for (int i = 0; i < data.rows(); ++i) diff += data.at(i, j).value();
      CHECK(std::fabs(diff / data.rows()) < 0.01);
    }
  }
}

TEST_CASE("correlated pairs agree more often than independent ones") {
  const auto independent = build_truth({2, {}, 1.0, 0.25});
  const auto correlated = build_truth({2, {{0, 1}}, 1.0, 0.25});
  auto agreement = [](const LabelMatrix& d) {
    double c = 0;
    for (int i = 0; i < d.rows(); ++i) c += d.at(i, 0) == d.at(i, 1) ? 1 : 0;
    return c / d.rows();
  };
  const auto di = sample_exact(independent, 100000, 9);
  const auto dc = sample_exact(correlated, 100000, 9);
  CHECK(agreement(dc) > agreement(di));
  // and both match their enumerated agreement probabilities
  for (const auto& pair :
       {std::pair{&independent, &di}, std::pair{&correlated, &dc}}) {
    const auto table = joint_table(*pair.first);
    const auto marginal = table.lambda_marginal();
    double p_agree = 0;
    for (long li = 0; li < 9; ++li) {
      const auto row = decode_lambda(li, 2);
      if (row[0] == row[1]) p_agree += marginal[li];
    }
    CHECK(agreement(*pair.second) == Catch::Approx(p_agree).margin(0.01));
  }
}

TEST_CASE("exact sampler passes a chi-square goodness-of-fit test") {
  auto rng = make_rng(555);
  for (int trial = 0; trial < 4; ++trial) {
    const int n = 2 + static_cast<int>(uniform_below(rng, 3));
    TruthSpec spec;
    spec.n = n;
    spec.theta_acc = 0.8 + 0.4 * uniform01(rng);
    spec.theta_cor = 0.2 + 0.4 * uniform01(rng);
    if (n >= 3) spec.cliques = {{0, 1}};
    const auto model = build_truth(spec);
    const auto data = sample_exact(model, 100000, 1000 + trial);
    const auto [stat, df] = chi_square_gof(data, joint_table(model));
    const boost::math::chi_squared dist(df);
    CHECK(stat < boost::math::quantile(dist, 0.999));
  }
}

TEST_CASE("exact sampler rejects unsupported models") {
  ParameterSet p;
  p.set(Dependency::accuracy(0), 1.0);
  p.set(Dependency::accuracy(1), 1.0);
  p.set(Dependency::conjunction(0, 1), 0.5);
  CHECK_THROWS_AS(sample_exact(GenerativeModel(2, p), 10, 1), ValidationError);

  // a correlation chain joining 12 labeling functions into one component
  TruthSpec chain;
  chain.n = 12;
  for (int j = 0; j + 1 < 12; ++j) chain.cliques.push_back({j, j + 1});
  CHECK_THROWS_AS(sample_exact(build_truth(chain), 10, 1), ValidationError);
}

TEST_CASE("samplers are deterministic under seed and vary across seeds") {
  const auto model = build_truth({4, {{0, 1}}, 1.0, 0.25});
  CHECK(sample_exact(model, 50, 7) == sample_exact(model, 50, 7));
  CHECK(!(sample_exact(model, 50, 7) == sample_exact(model, 50, 8)));
  CHECK(sample_gibbs(model, 20, 50, 7) == sample_gibbs(model, 20, 50, 7));
  CHECK(!(sample_gibbs(model, 20, 50, 7) == sample_gibbs(model, 20, 50, 8)));
}

TEST_CASE("gibbs sampler matches the enumerated joint") {
  const auto model = build_truth({3, {{0, 1}}, 1.0, 0.25});
  const auto data = sample_gibbs(model, 100000, 500, 11);
  CHECK(empirical_tv(data, joint_table(model)) < 0.02);
}

TEST_CASE("gibbs sampler handles conjunction models") {
  ParameterSet p;
  p.set(Dependency::accuracy(0), 1.0);
  p.set(Dependency::accuracy(1), 0.5);
  p.set(Dependency::conjunction(0, 1), 0.7);
  const GenerativeModel model(2, p);
  const auto data = sample_gibbs(model, 50000, 300, 13);
  CHECK(empirical_tv(data, joint_table(model)) < 0.02);
}

TEST_CASE("exact and gibbs samplers agree on moments") {
  ParameterSet p;
  for (int j = 0; j < 3; ++j) p.set(Dependency::accuracy(j), 0.0);
  p.set(Dependency::correlation(0, 1), 0.5);
  const GenerativeModel model(3, p);
  const auto de = sample_exact(model, 30000, 3);
  const auto dg = sample_gibbs(model, 30000, 200, 3);
  for (int j = 0; j < 3; ++j) {
    double me = 0, mg = 0;
    for (int i = 0; i < de.rows(); ++i) me += de.at(i, j).value();
    for (int i = 0; i < dg.rows(); ++i) mg += dg.at(i, j).value();
    CHECK(std::fabs(me / de.rows() - mg / dg.rows()) < 0.02);
  }
  double ce = 0, cg = 0;
  for (int i = 0; i < de.rows(); ++i)
    ce += de.at(i, 0).value() * de.at(i, 1).value();
  for (int i = 0; i < dg.rows(); ++i)
    cg += dg.at(i, 0).value() * dg.at(i, 1).value();
  CHECK(std::fabs(ce / de.rows() - cg / dg.rows()) < 0.02);
}

TEST_CASE("catastrophe augmentation") {
  const auto base = sample_exact(build_truth({5, {}, 1.0, 0.25}), 5000, 17);

  SECTION("appends identical copies") {
    const auto aug = augment_catastrophe(base, 3, 0.5, 23);
    REQUIRE(aug.cols() == 8);
    for (int i = 0; i < aug.rows(); ++i) {
      CHECK(aug.at(i, 5) == aug.at(i, 6));
      CHECK(aug.at(i, 5) == aug.at(i, 7));
      CHECK(aug.at(i, 0) == base.at(i, 0));
    }
  }
  SECTION("abstain_prob 1 gives all-zero columns") {
    const auto aug = augment_catastrophe(base, 2, 1.0, 23);
    for (int i = 0; i < aug.rows(); ++i) {
      CHECK(aug.at(i, 5).abstains());
      CHECK(aug.at(i, 6).abstains());
    }
  }
  SECTION("the random column is independent of the originals") {
    const auto aug = augment_catastrophe(base, 1, 0.5, 23);
    for (int j = 0; j < 5; ++j) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      const int m = aug.rows();
      for (int i = 0; i < m; ++i) {
        const double x = aug.at(i, j).value(), y = aug.at(i, 5).value();
        sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
      }
      const double cov = sxy / m - (sx / m) * (sy / m);
      const double vx = sxx / m - (sx / m) * (sx / m);
      const double vy = syy / m - (sy / m) * (sy / m);
      CHECK(std::fabs(cov / std::sqrt(vx * vy)) < 0.05);
    }
  }
  SECTION("copies must be positive") {
    CHECK_THROWS_AS(augment_catastrophe(base, 0, 0.5, 1), ValidationError);
  }
}
