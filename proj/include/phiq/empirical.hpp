#ifndef PHIQ_EMPIRICAL_HPP
#define PHIQ_EMPIRICAL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "phiq/errors.hpp"
#include "phiq/format.hpp"
#include "phiq/process.hpp"

namespace phiq {

/// F_n(x) = #{i : X_i <= x} / n over a fixed sample, held as sorted values.
/// Evaluation is a binary search; the left limit F_n(x-) is exposed because
/// exact suprema of |F_n - F| are attained at one-sided limits.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::span<const double> values) : sorted_(values.begin(), values.end()) {
    if (sorted_.empty()) throw ArgumentError("empirical CDF needs at least one value");
    for (double v : sorted_) {
      if (std::isnan(v)) throw DataError("empirical CDF input contains NaN");
    }
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t size() const noexcept { return sorted_.size(); }
  const std::vector<double>& sorted_values() const noexcept { return sorted_; }

  std::size_t count_le(double x) const {
    return static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
  }
  std::size_t count_lt(double x) const {
    return static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
  }

  double operator()(double x) const { return static_cast<double>(count_le(x)) / size(); }
  double left_limit(double x) const { return static_cast<double>(count_lt(x)) / size(); }

  bool has_ties() const { return std::adjacent_find(sorted_.begin(), sorted_.end()) != sorted_.end(); }

 private:
  std::vector<double> sorted_;
};

inline EmpiricalCdf build_ecdf(const SamplePath& path) { return EmpiricalCdf(path.values); }

/// Writes `x,F_n` at each distinct sample value.
inline void write_ecdf_csv(std::ostream& out, const EmpiricalCdf& cdf) {
  out << "x,F_n\n";
  const auto& v = cdf.sorted_values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    out << sig17(v[i]) << ',' << sig17(static_cast<double>(i + 1) / v.size()) << '\n';
  }
}

/// F_n at the k-th order statistic, as the library evaluates it: fl(k / n).
inline double step_level(std::size_t k, std::size_t n) { return static_cast<double>(k) / static_cast<double>(n); }

/// Smallest k in [1, n] with fl(k/n) >= p, i.e. the index realising
/// inf{x : F_n(x) >= p} for the F_n values this library computes. For a level
/// p that is the double nearest a fraction j/n this is j, so decimal levels
/// behave as written (n = 10, p = 0.1 gives 1; p = 0.7 gives 7).
inline std::size_t quantile_order_index(std::size_t n, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("quantile level must lie in (0,1), got " + shortest(p));
  if (n == 0) throw ArgumentError("quantile of an empty sample");
  auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * p));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && step_level(k - 1, n) >= p) --k;
  while (k < n && step_level(k, n) < p) ++k;
  return k;
}

struct QuantileEstimate {
  double p = 0.0;
  double value = 0.0;
  std::size_t n = 0;
  std::size_t order_index = 0;  // 1-based
};

/// F_n^{-1}(p) = inf{x : F_n(x) >= p}: the order statistic X_(ceil(np)), no
/// interpolation.
inline QuantileEstimate sample_quantile(const EmpiricalCdf& cdf, double p) {
  const auto k = quantile_order_index(cdf.size(), p);
  return {p, cdf.sorted_values()[k - 1], cdf.size(), k};
}

/// A right-continuous nondecreasing step function: F(x) = levels[i] for
/// points[i] <= x < points[i+1], and 0 left of points[0].
class StepCdf {
 public:
  StepCdf(std::vector<double> points, std::vector<double> levels)
      : points_(std::move(points)), levels_(std::move(levels)) {
    if (points_.empty() || points_.size() != levels_.size()) {
      throw ArgumentError("step CDF needs matching, nonempty breakpoint and level lists");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (i > 0 && !(points_[i] > points_[i - 1])) throw ArgumentError("breakpoints must be strictly increasing");
      if (!(levels_[i] >= 0.0 && levels_[i] <= 1.0)) throw ArgumentError("levels must lie in [0,1]");
      if (i > 0 && levels_[i] < levels_[i - 1]) throw ArgumentError("levels must be nondecreasing");
    }
  }

  /// Distribution with the given point masses, normalized so F reaches 1.
  static StepCdf from_masses(std::vector<double> points, std::span<const double> masses) {
    if (points.size() != masses.size()) throw ArgumentError("points and masses differ in length");
    double total = 0.0;
    for (double w : masses) {
      if (!(w >= 0.0)) throw ArgumentError("masses must be nonnegative");
      total += w;
    }
    if (!(total > 0.0)) throw ArgumentError("total mass must be positive");
    std::vector<double> levels(masses.size());
    double running = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
      running += masses[i];
      levels[i] = std::min(1.0, running / total);
    }
    levels.back() = 1.0;
    return StepCdf(std::move(points), std::move(levels));
  }

  double operator()(double x) const {
    auto it = std::upper_bound(points_.begin(), points_.end(), x);
    if (it == points_.begin()) return 0.0;
    return levels_[static_cast<std::size_t>(it - points_.begin()) - 1];
  }

  const std::vector<double>& points() const noexcept { return points_; }
  const std::vector<double>& levels() const noexcept { return levels_; }

 private:
  std::vector<double> points_;
  std::vector<double> levels_;
};

/// inf{x : F(x) >= t}; nondecreasing and left-continuous in t.
inline double generalized_inverse(const StepCdf& cdf, double t) {
  if (!(t > 0.0 && t < 1.0)) throw ArgumentError("level must lie in (0,1), got " + shortest(t));
  const auto& levels = cdf.levels();
  auto it = std::lower_bound(levels.begin(), levels.end(), t);
  if (it == levels.end()) {
    throw DomainError("level " + shortest(t) + " is never reached (sup F = " + shortest(levels.back()) + ")");
  }
  return cdf.points()[static_cast<std::size_t>(it - levels.begin())];
}

}  // namespace phiq

#endif  // PHIQ_EMPIRICAL_HPP
