// Exponential inequality constants and its Monte-Carlo check.
#include <sstream>

#include <gtest/gtest.h>

#include "phiq/bounds.hpp"

using namespace phiq;

namespace {

BoundInputs basic(double eps) {
  BoundInputs in;
  in.n = 1000;
  in.epsilon = eps;
  in.beta = 0.25;
  in.d_abs = 0.5;
  in.delta2 = 250.0;
  return in;
}

MixingProfile two_state(double a) { return phi_markov(TransitionMatrix::two_state(a)); }

}  // namespace

TEST(ExponentialBound, ZeroMixingCollapse) {
  for (double eps : {1.0, 10.0, 50.0}) {
    const auto r = lemma31_bound(basic(eps));
    EXPECT_EQ(r.c1, 1.0);
    EXPECT_EQ(r.c2, 4.0);
    EXPECT_EQ(r.m, 5u);  // floor(1000^{1/4}) = floor(5.62)
    const double expected = 2.0 * std::exp(1.0) * std::exp(-eps * eps / (8.0 * (500.0 + std::pow(1000.0, 0.25) * 0.5 * eps)));
    EXPECT_NEAR(r.value, expected, 1e-15 * expected);
    EXPECT_LE(r.exponent, 0.0);
  }
}

TEST(ExponentialBound, TwoStateC2MatchesDirectSum) {
  BoundInputs in = basic(1.0);
  in.n = 10000;
  in.delta2 = 2500.0;
  in.profile = two_state(0.3);
  const auto r = lemma31_bound(in);
  EXPECT_EQ(r.m, 10u);
  EXPECT_NEAR(r.c2, 23.466126827260208, 1e-12);
  EXPECT_NEAR(r.c1, std::exp(2.0 * std::exp(1.0) * 1000.0 * std::pow(0.4, 10) / 2.0), 1e-12);
}

TEST(ExponentialBound, FloorAndCeilingRounding) {
  BoundInputs in = basic(1.0);
  EXPECT_EQ(lemma31_bound(in).m, 5u);
  in.rounding = BlockRounding::ceiling;
  EXPECT_EQ(lemma31_bound(in).m, 6u);
  in.n = 16;
  in.delta2 = 4.0;
  EXPECT_EQ(lemma31_bound(in).m, 2u);  // 16^{1/4} is exactly 2 either way
}

TEST(ExponentialBound, NonincreasingInEpsilon) {
  BoundInputs in = basic(0.1);
  in.profile = two_state(0.3);
  double prev = INFINITY;
  for (int i = 0; i < 200; ++i) {
    in.epsilon = 0.1 * std::pow(1.05, i);
    const double v = lemma31_bound(in).value;
    EXPECT_LE(v, prev);
    prev = v;
  }
  in.epsilon = 1e6;
  EXPECT_LT(lemma31_bound(in).value, 1e-100);
}

TEST(ExponentialBound, MonotoneInMixing) {
  // each chain is pointwise nondecreasing in phi
  const std::vector<std::vector<MixingProfile>> chains{
      {MixingProfile::zero(), two_state(0.45), two_state(0.3), two_state(0.1)},
      {MixingProfile::zero(), MixingProfile::m_dependent(1), MixingProfile::m_dependent(2),
       MixingProfile::m_dependent(20)}};
  for (const auto& ordered : chains) {
    for (double eps : {5.0, 20.0, 80.0}) {
      BoundInputs in = basic(eps);
      double c1 = 0, c2 = 0, v = 0;
      for (const auto& profile : ordered) {
        in.profile = profile;
        const auto r = lemma31_bound(in);
        EXPECT_GE(r.c1, c1);
        EXPECT_GE(r.c2, c2);
        EXPECT_GE(r.value, v);
        c1 = r.c1;
        c2 = r.c2;
        v = r.value;
      }
    }
  }
}

TEST(ExponentialBound, InputErrors) {
  BoundInputs in = basic(1.0);
  in.n = 2;
  in.beta = 0.25;
  in.delta2 = 0.5;
  EXPECT_NO_THROW(lemma31_bound(in));  // 2^{1/4} floors to 1
  in.beta = 0.0;
  EXPECT_THROW(lemma31_bound(in), ArgumentError);
  in = basic(1.0);
  in.delta2 = 1000.0 * 0.25 * 1.1;
  EXPECT_THROW(lemma31_bound(in), ArgumentError);
  in = basic(-1.0);
  EXPECT_THROW(lemma31_bound(in), ArgumentError);
  EXPECT_EQ(block_length(3, 0.01, BlockRounding::floor), 1u);
}

TEST(C3, KnownProfiles) {
  EXPECT_EQ(c3_of(MixingProfile::zero()), 4.0);
  EXPECT_EQ(c3_of(MixingProfile::m_dependent(2)), 36.0);
  const double r = std::sqrt(0.4);
  EXPECT_NEAR(c3_of(two_state(0.3)), 4.0 * (1.0 + 4.0 * (1.0 / std::sqrt(2.0)) * (r / (1.0 - r))), 1e-12);
  EXPECT_NEAR(c3_of(two_state(0.3)), 23.468168212655385, 1e-12);
}

TEST(C3, NonSummableIsADomainError) {
  const auto slow = MixingProfile::polynomial({1.0}, 1.0, 1.5, MixingProfile::Kind::upper_bound);
  EXPECT_THROW(c3_of(slow), DomainError);
}

TEST(BoundVsMonteCarlo, IidIndicatorNeverFlagged) {
  const auto spec = ProcessSpec::iid(uniform_marginal());
  const auto t = indicator_transform(spec.marginal(), 0.5);
  EXPECT_EQ(t.sup_abs, 0.5);
  EXPECT_EQ(t.second_moment, 0.25);
  const auto table = bound_vs_montecarlo(spec, t, 1000, 0.25, default_eps_grid(1000, t), 2000, 7);
  EXPECT_EQ(table.rows.size(), 20u);
  EXPECT_EQ(table.flagged(), 0u);
  for (const auto& row : table.rows) {
    EXPECT_GE(row.mc_tail, 0.0);
    EXPECT_LE(row.mc_tail, 1.0);
    EXPECT_LE(row.mc_ci_lower, row.mc_tail);
  }
}

TEST(BoundVsMonteCarlo, MDependentIndicatorNeverFlagged) {
  const auto spec = ProcessSpec::m_dependent(1);
  const auto t = indicator_transform(spec.marginal(), spec.marginal().inv_cdf(0.5));
  const auto table = bound_vs_montecarlo(spec, t, 1000, 0.25, default_eps_grid(1000, t), 2000, 8);
  EXPECT_EQ(table.flagged(), 0u);
}

TEST(BoundVsMonteCarlo, ImpossibleEpsilonHasZeroTail) {
  const auto spec = ProcessSpec::iid(uniform_marginal());
  const auto t = indicator_transform(spec.marginal(), 0.5);
  const auto table = bound_vs_montecarlo(spec, t, 100, 0.25, {100.0 * 0.5 + 1.0}, 100, 9);
  EXPECT_EQ(table.rows[0].mc_tail, 0.0);
  EXPECT_GE(table.rows[0].bound, 0.0);
  EXPECT_FALSE(table.rows[0].flag);
}

TEST(BoundVsMonteCarlo, TooFewReplications) {
  const auto spec = ProcessSpec::iid(uniform_marginal());
  EXPECT_THROW(bound_vs_montecarlo(spec, indicator_transform(spec.marginal(), 0.5), 100, 0.25, {1.0}, 99, 1),
               StatisticsError);
}

TEST(BoundVsMonteCarlo, DeterministicAcrossThreadsAndCsvShape) {
  const auto spec = ProcessSpec::m_dependent(2);
  const auto t = indicator_transform(spec.marginal(), 0.4);
  const auto grid = default_eps_grid(500, t, 5);
  std::ostringstream a, b;
  write_bound_csv(a, bound_vs_montecarlo(spec, t, 500, 0.25, grid, 300, 10, 1));
  write_bound_csv(b, bound_vs_montecarlo(spec, t, 500, 0.25, grid, 300, 10, 4));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "epsilon,mc_tail,mc_ci_halfwidth,bound,flag");
}

TEST(ClopperPearson, KnownEndpoints) {
  auto [lo, hi] = clopper_pearson(0, 100, 0.99);
  EXPECT_EQ(lo, 0.0);
  EXPECT_NEAR(hi, 1.0 - std::pow(0.005, 1.0 / 100.0), 1e-12);
  std::tie(lo, hi) = clopper_pearson(100, 100, 0.99);
  EXPECT_NEAR(lo, std::pow(0.005, 1.0 / 100.0), 1e-12);
  EXPECT_EQ(hi, 1.0);
}
