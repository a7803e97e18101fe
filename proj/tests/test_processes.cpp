// Generators, marginals and mixing profiles.
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "phiq/empirical.hpp"
#include "phiq/parallel.hpp"
#include "phiq/process.hpp"
#include "test_support.hpp"

using namespace phiq;

namespace {

std::vector<MarginalModel> shipped_marginals() {
  return {uniform_marginal(), exponential_marginal(), exponential_marginal(2.5), normal_marginal(),
          normal_marginal(0.001, 0.02), bates_marginal(2), bates_marginal(3), bates_marginal(5)};
}

std::vector<ProcessSpec> shipped_generators() {
  return {ProcessSpec::iid(uniform_marginal()), ProcessSpec::m_dependent(1), ProcessSpec::m_dependent(2),
          ProcessSpec::markov_copula(TransitionMatrix::two_state(0.3), uniform_marginal()),
          ProcessSpec::markov_copula(TransitionMatrix::two_state(0.1), exponential_marginal())};
}

}  // namespace

// =============================================================================
// Marginals
// =============================================================================

TEST(Marginal, CdfNondecreasingOnRandomGrids) {
  std::mt19937_64 rng(11);
  for (const auto& m : shipped_marginals()) {
    std::uniform_real_distribution<double> t(0.001, 0.999);
    std::vector<double> xs(2000);
    for (auto& x : xs) x = m.inv_cdf(t(rng)) + std::normal_distribution<double>(0, 0.01)(rng);
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 1; i < xs.size(); ++i) EXPECT_LE(m.cdf(xs[i - 1]), m.cdf(xs[i])) << m.name;
  }
}

TEST(Marginal, GeneralizedInverseLawsHoldExactly) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> t(1e-6, 1.0 - 1e-6);
  for (const auto& m : shipped_marginals()) {
    for (int i = 0; i < 2000; ++i) {
      const double level = t(rng);
      const double x = m.inv_cdf(level);
      EXPECT_GE(m.cdf(x), level) << m.name;
      const double y = m.inv_cdf(level);
      const double fy = m.cdf(y);
      if (fy > 0.0 && fy < 1.0) EXPECT_LE(m.inv_cdf(fy), y) << m.name;
    }
  }
}

TEST(Marginal, DensityIntegratesToOne) {
  for (const auto& m : shipped_marginals()) {
    double total = 0.0;
    if (std::isfinite(m.support.lo) && std::isfinite(m.support.hi)) {
      // piecewise polynomial densities: integrate between knots
      const int pieces = 20;
      for (int i = 0; i < pieces; ++i) {
        const double a = m.support.lo + (m.support.hi - m.support.lo) * i / pieces;
        const double b = m.support.lo + (m.support.hi - m.support.lo) * (i + 1) / pieces;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(m.pdf, a, b, 10, 1e-12);
      }
    } else if (std::isfinite(m.support.lo)) {
      boost::math::quadrature::exp_sinh<double> integrator;
      total = integrator.integrate(m.pdf, m.support.lo, std::numeric_limits<double>::infinity());
    } else {
      boost::math::quadrature::tanh_sinh<double> integrator;
      total = integrator.integrate(m.pdf, -std::numeric_limits<double>::infinity(),
                                   std::numeric_limits<double>::infinity());
    }
    EXPECT_NEAR(total, 1.0, 1e-6) << m.name;
  }
}

TEST(Marginal, DensityPositiveAcrossSupportedLevels) {
  for (const auto& m : shipped_marginals()) {
    for (double p = 0.01; p <= 0.99 + 1e-12; p += 0.01) EXPECT_GT(m.pdf(m.inv_cdf(p)), 0.0) << m.name << " p=" << p;
  }
}

TEST(Marginal, DerivativeBoundDominatesFiniteDifferences) {
  for (const auto& m : shipped_marginals()) {
    double worst = 0.0;
    const double h = 1e-6;
    for (double p = 0.01; p <= 0.99; p += 0.005) {
      const double x = m.inv_cdf(p);
      worst = std::max(worst, std::abs(m.pdf(x + h) - m.pdf(x - h)) / (2 * h));
    }
    EXPECT_LE(worst, m.pdf_derivative_bound * (1 + 1e-4) + 1e-9) << m.name;
  }
}

TEST(Marginal, BatesClosedForms) {
  const auto tri = bates_marginal(2);
  EXPECT_DOUBLE_EQ(tri.cdf(0.5), 0.5);
  EXPECT_DOUBLE_EQ(tri.pdf(0.5), 2.0);
  EXPECT_NEAR(tri.cdf(0.25), 2 * 0.25 * 0.25, 1e-15);
  // Irwin-Hall(3) density at s = 1.5 is 3/4; the mean of three has density 9/4
  EXPECT_NEAR(bates_marginal(3).pdf(0.5), 2.25, 1e-14);
  EXPECT_DOUBLE_EQ(bates_marginal(3).inv_cdf(0.5), 0.5);
}

TEST(Marginal, DescriptorParsing) {
  EXPECT_EQ(make_marginal("uniform").name, "uniform");
  EXPECT_EQ(make_marginal("exponential:2").name, "exponential:2");
  EXPECT_EQ(make_marginal("normal:0:0.02").name, "normal:0:0.02");
  EXPECT_EQ(make_marginal("bates:3").name, "bates:3");
  EXPECT_THROW(make_marginal("cauchy"), SpecError);
  EXPECT_THROW(make_marginal("exponential:-1"), ArgumentError);
  EXPECT_THROW(uniform_marginal().inv_cdf(0.0), ArgumentError);
}

// =============================================================================
// i.i.d. generator
// =============================================================================

TEST(GenIid, DeterministicAndInsideUnitInterval) {
  const auto a = gen_iid(uniform_marginal(), 5, 42);
  const auto b = gen_iid(uniform_marginal(), 5, 42);
  ASSERT_EQ(a.values.size(), 5u);
  EXPECT_EQ(a.values, b.values);
  for (double v : a.values) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_EQ(a.n, 5u);
  EXPECT_EQ(a.seed, 42u);
}

TEST(GenIid, RejectsZeroLength) { EXPECT_THROW(gen_iid(uniform_marginal(), 0, 1), ArgumentError); }

TEST(GenIid, UniformEcdfAtHalf) {
  const auto path = gen_iid(uniform_marginal(), 100000, 1);
  const double fn = test::count_cdf(path.values, 0.5);
  EXPECT_LE(std::abs(fn - 0.5), 4.0 * std::sqrt(1.0 / (4.0 * 1e5)));
}

TEST(GenIid, ExponentialMedian) {
  const auto m = exponential_marginal();
  EXPECT_NEAR(m.inv_cdf(0.5), std::log(2.0), 1e-15);
  const auto path = gen_iid(m, 100000, 7);
  const auto q = sample_quantile(EmpiricalCdf(path.values), 0.5);
  EXPECT_NEAR(q.value, std::log(2.0), 0.02);
}

// =============================================================================
// m-dependent generator
// =============================================================================

TEST(GenMDependent, ValuesAreMovingAveragesOfUniforms) {
  const auto path = gen_m_dependent(1, 4, 3);
  Engine engine(3);
  std::vector<double> u(5);
  for (auto& x : u) x = uniform_open(engine);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(path.values[i], (u[i] + u[i + 1]) / 2.0);
  EXPECT_DOUBLE_EQ(ProcessSpec::m_dependent(1).marginal().cdf(0.5), 0.5);
}

TEST(GenMDependent, IndependentBeyondLagM) {
  const auto path = gen_m_dependent(1, 100000, 9);
  EXPECT_NEAR(test::lag_autocorrelation(path.values, 2), 0.0, 0.02);
}

TEST(GenMDependent, OverlapCorrelation) {
  // Cov(mean(U1..U3), mean(U2..U4)) / Var(mean(U1..U3)) = 2/3 from the overlap count.
  const auto path = gen_m_dependent(2, 100000, 9);
  EXPECT_NEAR(test::lag_autocorrelation(path.values, 1), 2.0 / 3.0, 0.02);
}

TEST(GenMDependent, RejectsZeroRange) {
  EXPECT_THROW(gen_m_dependent(0, 10, 1), ArgumentError);
  EXPECT_THROW(ProcessSpec::m_dependent(0), ArgumentError);
}

// =============================================================================
// Markov copula generator
// =============================================================================

TEST(GenMarkovCopula, HalfSwitchChainIsIid) {
  const auto path = gen_markov_copula(TransitionMatrix::two_state(0.5), uniform_marginal(), 10000, 5);
  EXPECT_NEAR(test::lag_autocorrelation(path.values, 1), 0.0, 0.04);
}

TEST(GenMarkovCopula, TwoStateLagOneCorrelation) {
  // U = (S + V)/2: Cov(U0, U1) = Cov(S0, S1)/4 = (1 - 2a)/16, Var U = 1/12,
  // so Corr = 0.75 (1 - 2a) = 0.6 at a = 0.1.
  const double a = 0.1;
  const double analytic = 0.75 * (1.0 - 2.0 * a);
  EXPECT_DOUBLE_EQ(analytic, 0.6);
  const auto path = gen_markov_copula(TransitionMatrix::two_state(a), uniform_marginal(), 100000, 5);
  const double r = test::lag_autocorrelation(path.values, 1);
  EXPECT_GT(r, 0.0);
  EXPECT_NEAR(r, analytic, 0.03);
}

TEST(GenMarkovCopula, ThreeStateExponentialMean) {
  const TransitionMatrix p(3, {0.5, 0.3, 0.2, 0.2, 0.5, 0.3, 0.3, 0.2, 0.5});
  const auto path = gen_markov_copula(p, exponential_marginal(), 1000, 8);
  for (double v : path.values) EXPECT_GE(v, 0.0);
  const double mean = std::accumulate(path.values.begin(), path.values.end(), 0.0) / 1000.0;
  EXPECT_NEAR(mean, 1.0, 0.15);
}

TEST(GenMarkovCopula, RejectsBadChains) {
  EXPECT_THROW(validate_uniform_ergodic(TransitionMatrix(2, {0.5, 0.6, 0.5, 0.4})), SpecError);
  // rows stochastic but stationary law (2/3, 1/3)
  EXPECT_THROW(validate_uniform_ergodic(TransitionMatrix(2, {0.75, 0.25, 0.5, 0.5})), SpecError);
  EXPECT_THROW(validate_uniform_ergodic(TransitionMatrix::identity(2)), SpecError);         // reducible
  EXPECT_THROW(validate_uniform_ergodic(TransitionMatrix(2, {0.0, 1.0, 1.0, 0.0})), SpecError);  // periodic
  EXPECT_THROW(gen_markov_copula(TransitionMatrix::identity(3), uniform_marginal(), 10, 1), SpecError);
  EXPECT_NO_THROW(validate_uniform_ergodic(TransitionMatrix::two_state(0.3)));
}

// =============================================================================
// Mixing coefficients
// =============================================================================

TEST(PhiMarkov, TwoStateClosedForm) {
  for (double a : {0.1, 0.3, 0.45}) {
    const auto profile = phi_markov(TransitionMatrix::two_state(a));
    EXPECT_EQ(profile.kind(), MixingProfile::Kind::exact);
    for (std::size_t n = 1; n <= 30; ++n) {
      EXPECT_NEAR(profile.phi(n), std::pow(std::abs(1 - 2 * a), n) / 2, 1e-12) << "a=" << a << " n=" << n;
    }
  }
}

TEST(PhiMarkov, HalfSwitchChainHasZeroMixing) {
  const auto profile = phi_markov(TransitionMatrix::two_state(0.5));
  for (std::size_t n = 1; n <= 50; ++n) EXPECT_EQ(profile.phi(n), 0.0);
  EXPECT_EQ(profile.c3(), 4.0);
}

TEST(PhiMarkov, DeviationPowersMatchNaiveMatrixPowers) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = test::random_doubly_stochastic(2 + trial % 6, rng);
    const auto k = p.states();
    const auto d = stationary_deviation(p);
    TransitionMatrix dn = d;
    std::vector<double> pn = p.entries();
    for (int lag = 1; lag <= 10; ++lag) {
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) EXPECT_NEAR(dn(i, j), pn[i * k + j] - 1.0 / k, 1e-15);
      std::vector<double> next(k * k, 0.0);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
          for (std::size_t l = 0; l < k; ++l) next[i * k + j] += pn[i * k + l] * p(l, j);
      pn = next;
      dn = dn * d;
    }
  }
}

TEST(PhiMarkov, MatchesSubsetEnumeration) {
  std::mt19937_64 rng(22);
  for (std::size_t k = 2; k <= 10; ++k) {
    const auto p = test::random_doubly_stochastic(k, rng);
    const auto profile = phi_markov(p);
    const auto d = stationary_deviation(p);
    TransitionMatrix dn = d;
    for (std::size_t lag = 1; lag <= 10; ++lag) {
      double brute = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
          double s = 0.0;
          for (std::size_t j = 0; j < k; ++j)
            if (mask & (1u << j)) s += dn(i, j);
          brute = std::max(brute, std::abs(s));
        }
      EXPECT_EQ(profile.phi(lag), brute) << "K=" << k << " lag=" << lag;
      dn = dn * d;
    }
  }
}

TEST(PhiMarkov, Nonincreasing) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto profile = phi_markov(test::random_doubly_stochastic(3 + trial % 5, rng));
    for (std::size_t n = 1; n < 200; ++n) {
      EXPECT_LE(profile.phi(n + 1), profile.phi(n));
      EXPECT_GE(profile.phi(n), 0.0);
      EXPECT_LE(profile.phi(n), 1.0);
    }
  }
}

TEST(MixingProfile, MDependentConservativeProfile) {
  const auto profile = MixingProfile::m_dependent(2);
  EXPECT_EQ(profile.phi(1), 1.0);
  EXPECT_EQ(profile.phi(2), 1.0);
  for (std::size_t n = 3; n < 20; ++n) EXPECT_EQ(profile.phi(n), 0.0);
  EXPECT_EQ(profile.c3(), 36.0);
  EXPECT_EQ(ProcessSpec::m_dependent(2).mixing().c3(), 36.0);
}

TEST(MixingProfile, IidProfileIsZero) {
  const auto spec = ProcessSpec::iid(uniform_marginal());
  for (std::size_t n = 1; n < 20; ++n) EXPECT_EQ(spec.mixing().phi(n), 0.0);
  EXPECT_EQ(spec.mixing().c3(), 4.0);
}

TEST(MixingProfile, CopulaProfileIsUpperBound) {
  const auto spec = ProcessSpec::markov_copula(TransitionMatrix::two_state(0.3), uniform_marginal());
  EXPECT_EQ(spec.mixing().kind(), MixingProfile::Kind::upper_bound);
}

TEST(HalfSeries, ClosedForms) {
  EXPECT_EQ(half_series(MixingProfile::zero(), 1e-12), 0.0);
  EXPECT_EQ(half_series(MixingProfile::m_dependent(1), 1e-12), 1.0);
  // (1/sqrt 2) sqrt(0.4) / (1 - sqrt(0.4)), evaluated independently
  const double expected = 1.2167605132909616;
  EXPECT_NEAR(half_series(phi_markov(TransitionMatrix::two_state(0.3)), 1e-12), expected, 1e-12);
}

TEST(HalfSeries, PolynomialTail) {
  // phi(n) = n^-4: sum of n^-2 = pi^2/6
  const auto profile = MixingProfile::polynomial({}, 1.0, 4.0, MixingProfile::Kind::upper_bound);
  EXPECT_NEAR(profile.half_series(1e-6), M_PI * M_PI / 6.0, 1e-6);
  const auto divergent = MixingProfile::polynomial({}, 1.0, 2.0, MixingProfile::Kind::upper_bound);
  EXPECT_THROW(divergent.half_series(1e-6), DomainError);
  EXPECT_THROW(divergent.c3(), DomainError);
}

// =============================================================================
// Cross-generator properties
// =============================================================================

TEST(Generators, MarginalExactness) {
  for (const auto& spec : shipped_generators()) {
    std::vector<double> pooled;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto path = generate(spec, 100000, derive_seed(99, s));
      pooled.insert(pooled.end(), path.values.begin(), path.values.end());
    }
    const EmpiricalCdf cdf(pooled);
    for (int i = 1; i <= 9; ++i) {
      const double p = i / 10.0;
      const double band = 5.0 * 3.0 * std::sqrt(p * (1 - p) / 1e6);
      EXPECT_LE(std::abs(cdf(spec.marginal().inv_cdf(p)) - p), band) << spec.id() << " p=" << p;
    }
  }
}

TEST(Generators, ValuesInsideSupport) {
  for (const auto& spec : shipped_generators()) {
    const auto path = generate(spec, 5000, 3);
    for (double v : path.values) EXPECT_TRUE(spec.marginal().support.contains(v)) << spec.id();
  }
}

TEST(Generators, DeterministicAcrossThreadCounts) {
  for (const auto& spec : shipped_generators()) {
    std::vector<std::vector<double>> one(8), many(8);
    parallel_for(8, 1, [&](std::size_t i) { one[i] = generate(spec, 2000, derive_seed(5, i)).values; });
    parallel_for(8, 4, [&](std::size_t i) { many[i] = generate(spec, 2000, derive_seed(5, i)).values; });
    EXPECT_EQ(one, many) << spec.id();
  }
}

// =============================================================================
// Serialization
// =============================================================================

TEST(SpecIo, KeyValueRoundTrip) {
  for (const auto& spec : shipped_generators()) {
    std::stringstream ss;
    write_process_spec(ss, spec, 77);
    const auto back = read_process_spec(ss);
    EXPECT_EQ(back.id(), spec.id());
    EXPECT_EQ(generate(back, 100, 77).values, generate(spec, 100, 77).values);
  }
}

TEST(SpecIo, RejectsBadConfigs) {
  EXPECT_THROW(process_spec_from({{"generator", "garch"}}), SpecError);
  EXPECT_THROW(process_spec_from({{"generator", "m_dependent"}}), SpecError);
  EXPECT_THROW(process_spec_from({{"generator", "markov_copula"}, {"transition", "0.9,0.1;0.5,0.5"}}), SpecError);
  std::stringstream bad("generator iid\n");
  EXPECT_THROW(read_process_spec(bad), DataError);
}

TEST(SpecIo, PathCsvHeader) {
  const auto spec = ProcessSpec::iid(uniform_marginal());
  std::stringstream ss;
  write_path_csv(ss, generate(spec, 3, 9));
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "# spec_id=iid[uniform];seed=9;n=3");
  std::getline(ss, line);
  EXPECT_EQ(line, "value");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, 3);
}
