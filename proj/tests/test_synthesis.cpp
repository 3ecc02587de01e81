#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sdcons/errors.hpp"
#include "sdcons/synthesis.hpp"

using namespace sdcons;
using namespace sdcons::synthesis;

namespace {

const DesignSpec kEx1{3.0, 0.3, 6.0};
const DesignSpec kEx2{1.0, 5.0, 60.0};

// Brute-force search for (k₁, k₂) on a fine grid.
bool grid_witness_exists(const InequalityLimits& l, int n = 400) {
  for (int i = 1; i < n; ++i) {
    const double k1 = l.a * i / n;
    for (int j = 1; j < n; ++j) {
      const double k2 = k1 + l.d * j / n;
      if (satisfies(l, k1, k2)) return true;
    }
  }
  return false;
}

}  // namespace

TEST(DesignSpec, Validation) {
  EXPECT_NO_THROW(kEx1.validate());
  EXPECT_THROW((DesignSpec{0.0, 1.0, 2.0}.validate()), DomainError);
  EXPECT_THROW((DesignSpec{1.0, 0.0, 2.0}.validate()), DomainError);
  EXPECT_THROW((DesignSpec{1.0, 3.0, 2.0}.validate()), DomainError);
  EXPECT_THROW((DesignSpec{1.0, 1.0, INFINITY}.validate()), DomainError);
}

TEST(Transform, InverseAndDeterminant) {
  const Matrix t = transform(1.5, 119.5);
  EXPECT_EQ(t, Matrix::from_rows({{118, -121}, {0, 2}}));
  EXPECT_LE(max_abs_diff(t * transform_inverse(1.5, 119.5), Matrix::identity(2)), 1e-13);
  EXPECT_THROW(transform(2.0, 1.0), DomainError);
  EXPECT_THROW(transform(0.0, 1.0), DomainError);
}

TEST(Limits, ExampleOneArithmetic) {
  const auto l = limits(kEx1, 1.5, 119.5);
  EXPECT_NEAR(l.a, 236.0 / 2232.0, 1e-16);
  EXPECT_NEAR(l.b, 4.0 / 36.0, 1e-16);
  EXPECT_NEAR(l.c, 4.0 / 36.3, 1e-16);
  EXPECT_NEAR(l.d, 4.0 / 744.0, 1e-17);
  EXPECT_THROW(limits(kEx1, 2.0, 2.0), DomainError);
}

TEST(Limits, LimitingCases) {
  EXPECT_LT(limits(kEx1, 10.0, 10.0 + 1e-9).a, 1e-10);
  const DesignSpec flat{0.1, 2.0, 2.0};
  const auto l = limits(flat, 100.0, 200.0);
  EXPECT_GT(l.c, l.d);
  EXPECT_NEAR(l.c / l.d, (300.0 + 0.1) / 300.0, 1e-15);
}

TEST(Feasibility, Examples) {
  EXPECT_TRUE(is_feasible(kEx1, 1.5, 119.5));  // 121/6 > 20
  EXPECT_TRUE(is_feasible(DesignSpec{1.0, 1.0, 1.0}, 1.0, 5.0));
  EXPECT_FALSE(is_feasible(DesignSpec{1.0, 1.0, 1.0}, 0.25, 0.75));
  EXPECT_FALSE(is_feasible(DesignSpec{2.0, 1.0, 3.0}, 0.5, 1.5));
}

TEST(AbstractConsistency, Examples) {
  EXPECT_TRUE(abstract_consistency(1, 2, 1.5, 1));
  EXPECT_FALSE(abstract_consistency(1, 1, 1.5, 0.4));
  EXPECT_FALSE(abstract_consistency(0.1, 2, 1.5, 0.4));  // a + d ≤ c
  EXPECT_THROW(abstract_consistency(0, 1, 1, 1), DomainError);
  EXPECT_THROW(abstract_consistency(1, 1, 1, -1), DomainError);
}

TEST(AbstractConsistency, WitnessAgreesWithGridSearch) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  int consistent = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const InequalityLimits l{u(rng), u(rng), u(rng), u(rng)};
    const auto w = consistency_witness(l);
    EXPECT_EQ(w.has_value(), abstract_consistency(l));
    if (w) {
      ++consistent;
      EXPECT_TRUE(satisfies(l, w->first, w->second)) << trial;
    }
    // A grid hit proves consistency; the converse only fails on slivers.
    if (grid_witness_exists(l, 60)) { EXPECT_TRUE(abstract_consistency(l)) << trial; }
  }
  EXPECT_GT(consistent, 100);
}

TEST(AbstractConsistency, WitnessFuzz) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto lu = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  for (int trial = 0; trial < 10000; ++trial) {
    const InequalityLimits l{lu(1e-4, 1), lu(1e-4, 1), lu(1e-4, 1), lu(1e-4, 1)};
    if (const auto w = consistency_witness(l)) { EXPECT_TRUE(satisfies(l, w->first, w->second)) << trial; }
  }
}

TEST(Design, ExampleOneHighPrecisionReplay) {
  // tests/oracles/replay_design.py
  const auto g = design(kEx1);
  EXPECT_EQ(g.mu1, 1.5);
  EXPECT_EQ(g.mu2, 119.5);
  EXPECT_NEAR(g.k1, 0.1055444474066174945940342, 1e-12 * 0.1055);
  EXPECT_NEAR(g.k2, 0.1103831570840368494327439, 1e-12 * 0.1104);
  EXPECT_NEAR(g.K(0, 0), 0.0008944444695476058863901202, 1e-12 * 0.000894);
  EXPECT_NEAR(g.K(0, 1), 0.1093054689496485808429742, 1e-12 * 0.1093);
  EXPECT_EQ(std::round(g.K(0, 0) * 1e4) / 1e4, 0.0009);
  EXPECT_EQ(std::round(g.K(0, 1) * 1e4) / 1e4, 0.1093);
}

TEST(Design, ExampleTwoHighPrecisionReplay) {
  const auto g = design(kEx2);
  EXPECT_EQ(g.mu1, 0.5);
  EXPECT_EQ(g.mu2, 24.5);
  EXPECT_NEAR(g.k1, 0.03023076923076923076923077, 1e-12 * 0.0302);
  EXPECT_NEAR(g.k2, 0.03253846153846153846153846, 1e-12 * 0.0325);
  EXPECT_NEAR(g.K(0, 0), 0.001259615384615384615384615, 1e-12 * 0.00126);
  EXPECT_NEAR(g.K(0, 1), 0.03201442307692307692307692, 1e-12 * 0.032);
  EXPECT_EQ(std::round(g.K(0, 0) * 1e4) / 1e4, 0.0013);
  EXPECT_EQ(std::round(g.K(0, 1) * 1e4) / 1e4, 0.032);
}

TEST(Design, GainMatchesTransform) {
  for (const auto& spec : {kEx1, kEx2}) {
    const auto g = design(spec);
    const Matrix kt = g.K * g.T;
    EXPECT_NEAR(kt(0, 0), g.k1, 1e-12 * g.k1);
    EXPECT_NEAR(kt(0, 1), g.k2, 1e-12 * g.k2);
  }
}

TEST(Design, SoundOverFuzzedSpecs) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto lu = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  for (int trial = 0; trial < 10000; ++trial) {
    const double l2 = lu(1e-3, 1e3);
    const DesignSpec spec{lu(1e-3, 1e2), l2, l2 * lu(1.0, 1e3)};
    const auto g = design(spec);
    EXPECT_TRUE(check_gain_inequalities(spec, g)) << trial;
    EXPECT_TRUE(is_feasible(spec, g.mu1, g.mu2)) << trial;
  }
}

TEST(Design, DeltaKFallbackForLongSampling) {
  // hbar = 40: b − c < 0.1d, so Δk = 0.9d leaves no room for k₁.
  const DesignSpec spec{40.0, 5.0, 150.0};
  const auto g = design(spec);
  const auto l = limits(spec, g.mu1, g.mu2);
  EXPECT_GT(l.c - l.a, 0.9 * l.d);
  EXPECT_TRUE(g.delta_k_adjusted);
  EXPECT_TRUE(check_gain_inequalities(spec, g));
  EXPECT_FALSE(design(kEx1).delta_k_adjusted);
  EXPECT_FALSE(design(kEx2).delta_k_adjusted);
}

TEST(CheckGainInequalities, Strictness) {
  const auto g = design(kEx1);
  EXPECT_TRUE(check_gain_inequalities(kEx1, g));
  auto zero = g;
  zero.k1 = 0.0;
  EXPECT_FALSE(check_gain_inequalities(kEx1, zero));
  const auto l = limits(kEx1, g.mu1, g.mu2);
  auto at_d = g;
  at_d.k2 = at_d.k1 + l.d;
  while (at_d.k2 - at_d.k1 < l.d) at_d.k2 = std::nextafter(at_d.k2, INFINITY);
  EXPECT_FALSE(check_gain_inequalities(kEx1, at_d));
  auto equal = g;
  equal.k2 = equal.k1;
  EXPECT_FALSE(check_gain_inequalities(kEx1, equal));
}

TEST(Limits, ADominatesBMinusD) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto lu = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  for (int trial = 0; trial < 10000; ++trial) {
    const double hbar = lu(1e-2, 1e2);
    const double mu1 = hbar * lu(1e-3, 1e2);
    const double mu2 = mu1 * (1.0 + lu(1e-6, 1e4));
    const auto l = limits(DesignSpec{hbar, 1.0, lu(1.0, 1e3)}, mu1, mu2);
    EXPECT_GE(l.a + l.d, l.b * (1.0 - 1e-12)) << trial;
  }
}

TEST(DesignWithMu, RejectsInfeasiblePair) {
  EXPECT_THROW(design_with_mu(kEx1, 1.5, 2.0), DomainError);
  EXPECT_NO_THROW(design_with_mu(kEx1, 1.5, 200.0));
}

TEST(MuGridSearch, FindsDesignWithPositiveSlack) {
  const auto def = design(kEx2);
  const double def_slack = relative_slack(limits(kEx2, def.mu1, def.mu2), def.k1, def.k2);
  const auto best = mu_grid_search(kEx2, 0.05, 500.0, 60);
  ASSERT_TRUE(best.has_value());
  EXPECT_GT(best->slack, 0.0);
  EXPECT_TRUE(check_gain_inequalities(kEx2, best->design));
  EXPECT_GT(def_slack, 0.0);
  EXPECT_THROW(mu_grid_search(kEx2, 1.0, 0.5, 10), DomainError);
  EXPECT_FALSE(mu_grid_search(kEx1, 0.1, 1.0, 10).has_value());
}
