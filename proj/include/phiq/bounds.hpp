#ifndef PHIQ_BOUNDS_HPP
#define PHIQ_BOUNDS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "phiq/errors.hpp"
#include "phiq/format.hpp"
#include "phiq/mixing.hpp"
#include "phiq/parallel.hpp"
#include "phiq/process.hpp"
#include "phiq/rng.hpp"

namespace phiq {

/// How the block length m is obtained from n^beta. The exponential inequality
/// defines its bracket as "the largest integer not exceeding x", i.e. floor,
/// although it is typeset with a ceiling glyph; `ceiling` exists only for
/// sensitivity runs.
enum class BlockRounding { floor, ceiling };

struct BoundInputs {
  std::size_t n = 2;
  double epsilon = 1.0;
  double beta = 0.25;
  double d_abs = 1.0;  // almost-sure bound on |X_i|
  double delta2 = 0.0; // sum of E X_i^2
  MixingProfile profile = MixingProfile::zero();
  BlockRounding rounding = BlockRounding::floor;
};

struct BoundResult {
  double value = 0.0;  // un-clamped; may exceed 1
  double c1 = 1.0;
  double c2 = 4.0;
  std::size_t m = 0;
  double exponent = 0.0;

  double clamped() const { return std::min(value, 1.0); }
};

inline std::size_t block_length(std::size_t n, double beta, BlockRounding rounding) {
  const double x = std::pow(static_cast<double>(n), beta);
  return static_cast<std::size_t>(rounding == BlockRounding::floor ? std::floor(x) : std::ceil(x));
}

/// P(|sum X_i| > eps) <= 2e C_1 exp{-eps^2 / (2 C_2 (2 Delta_2 + n^beta d eps))}
/// with C_1 = exp{2e n^{1-beta} phi(m)} and C_2 = 4[1 + 4 sum_{i<=2m} phi^{1/2}(i)],
/// for centred summands bounded by d (the caller's responsibility).
inline BoundResult lemma31_bound(const BoundInputs& in) {
  if (in.n < 2) throw ArgumentError("exponential inequality needs n >= 2");
  if (!(in.beta > 0.0 && in.beta < 1.0)) throw ArgumentError("beta must lie in (0,1)");
  if (!(in.epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  if (!(in.d_abs > 0.0)) throw ArgumentError("d must be positive");
  const auto nd = static_cast<double>(in.n);
  if (!(in.delta2 >= 0.0) || in.delta2 > nd * in.d_abs * in.d_abs * (1.0 + 1e-12)) {
    throw ArgumentError("Delta_2 must lie in [0, n d^2]");
  }
  BoundResult r;
  r.m = block_length(in.n, in.beta, in.rounding);
  if (r.m == 0) throw ArgumentError("block length m = 0; n^beta must be at least 1");
  const double e = std::exp(1.0);
  r.c1 = std::exp(2.0 * e * std::pow(nd, 1.0 - in.beta) * in.profile.phi(r.m));
  double half = 0.0;
  for (std::size_t i = 1; i <= 2 * r.m; ++i) half += std::sqrt(in.profile.phi(i));
  r.c2 = 4.0 * (1.0 + 4.0 * half);
  r.exponent = -(in.epsilon * in.epsilon) /
               (2.0 * r.c2 * (2.0 * in.delta2 + std::pow(nd, in.beta) * in.d_abs * in.epsilon));
  r.value = 2.0 * e * r.c1 * std::exp(r.exponent);
  return r;
}

/// C_3 = 4[1 + 4 sum phi^{1/2}(n)]
inline double c3_of(const MixingProfile& profile) { return profile.c3(); }

/// A bounded, centred statistic of one observation.
struct BoundedTransform {
  std::string name;
  std::function<double(double)> apply;
  double sup_abs = 1.0;        // |apply(x)| <= sup_abs
  double second_moment = 1.0;  // E apply(X)^2 under the marginal
};

/// x -> I(x <= t) - F(t)
inline BoundedTransform indicator_transform(const MarginalModel& marginal, double t) {
  const double ft = marginal.cdf(t);
  return {"indicator[" + shortest(t) + "]", [t, ft](double x) { return (x <= t ? 1.0 : 0.0) - ft; },
          std::max(ft, 1.0 - ft), ft * (1.0 - ft)};
}

struct BoundRow {
  double epsilon = 0.0;
  double mc_tail = 0.0;
  double mc_ci_lower = 0.0;
  double mc_ci_halfwidth = 0.0;
  double bound = 0.0;
  bool flag = false;  // MC lower confidence bound exceeds the inequality
};

struct BoundTable {
  std::string spec_id;
  std::size_t n = 0;
  double beta = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::vector<BoundRow> rows;

  std::size_t flagged() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const BoundRow& r) { return r.flag; }));
  }
};

/// `points` epsilons spaced geometrically from sqrt(Delta_2)/4 to 10 sqrt(Delta_2).
inline std::vector<double> default_eps_grid(std::size_t n, const BoundedTransform& transform, std::size_t points = 20) {
  const double scale = std::sqrt(static_cast<double>(n) * transform.second_moment);
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = scale * 0.25 * std::pow(40.0, t);
  }
  return grid;
}

/// Two-sided Clopper-Pearson interval at the given confidence level.
inline std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t trials, double confidence) {
  using boost::math::binomial_distribution;
  const double alpha = (1.0 - confidence) / 2.0;
  const auto k = static_cast<double>(successes);
  const auto t = static_cast<double>(trials);
  return {binomial_distribution<>::find_lower_bound_on_p(t, k, alpha),
          binomial_distribution<>::find_upper_bound_on_p(t, k, alpha)};
}

/// Monte-Carlo tail frequencies of |sum transform(X_i)| set against the
/// exponential inequality on an epsilon grid. Replication r uses seed
/// derive_seed(seed, r).
inline BoundTable bound_vs_montecarlo(const ProcessSpec& spec, const BoundedTransform& transform, std::size_t n,
                                      double beta, const std::vector<double>& eps_grid, std::size_t reps,
                                      std::uint64_t seed, unsigned threads = default_threads(),
                                      BlockRounding rounding = BlockRounding::floor) {
  if (reps < 100) throw StatisticsError("at least 100 replications are needed for a meaningful interval");
  std::vector<double> sums(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    const auto path = generate(spec, n, derive_seed(seed, r));
    double s = 0.0;
    for (double x : path.values) s += transform.apply(x);
    sums[r] = std::abs(s);
  });
  std::sort(sums.begin(), sums.end());

  BoundTable table{spec.id(), n, beta, reps, seed, {}};
  BoundInputs in;
  in.n = n;
  in.beta = beta;
  in.d_abs = transform.sup_abs;
  in.delta2 = static_cast<double>(n) * transform.second_moment;
  in.profile = spec.mixing();
  in.rounding = rounding;
  for (double eps : eps_grid) {
    BoundRow row;
    row.epsilon = eps;
    const auto exceed = static_cast<std::size_t>(sums.end() - std::upper_bound(sums.begin(), sums.end(), eps));
    row.mc_tail = static_cast<double>(exceed) / static_cast<double>(reps);
    const auto [lower, upper] = clopper_pearson(exceed, reps, 0.99);
    row.mc_ci_lower = lower;
    row.mc_ci_halfwidth = (upper - lower) / 2.0;
    in.epsilon = eps;
    row.bound = lemma31_bound(in).value;
    row.flag = row.mc_ci_lower > row.bound;
    table.rows.push_back(row);
  }
  return table;
}

inline void write_bound_csv(std::ostream& out, const BoundTable& table) {
  out << "epsilon,mc_tail,mc_ci_halfwidth,bound,flag\n";
  for (const auto& r : table.rows) {
    out << sig17(r.epsilon) << ',' << sig17(r.mc_tail) << ',' << sig17(r.mc_ci_halfwidth) << ','
        << sig17(r.bound) << ',' << (r.flag ? 1 : 0) << '\n';
  }
}

}  // namespace phiq

#endif  // PHIQ_BOUNDS_HPP
