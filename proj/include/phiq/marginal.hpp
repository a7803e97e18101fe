#ifndef PHIQ_MARGINAL_HPP
#define PHIQ_MARGINAL_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/tools/roots.hpp>

#include "phiq/errors.hpp"
#include "phiq/format.hpp"

namespace phiq {

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

/// A continuous marginal law with analytic F, f and generalized inverse.
///
/// `inv_cdf(t)` returns the least double x with cdf(x) >= t, so the
/// generalized-inverse laws F(F^{-1}(t)) >= t and F^{-1}(F(x)) <= x hold
/// exactly in floating point and not just up to rounding.
struct MarginalModel {
  std::string name;
  std::function<double(double)> cdf;
  std::function<double(double)> pdf;
  std::function<double(double)> inv_cdf;
  /// Upper bound on |f'| over the support (a global bound is a valid local one).
  double pdf_derivative_bound = 0.0;
  Interval support;

  double quantile(double p) const { return inv_cdf(p); }
};

namespace detail {

// Doubles mapped onto an order-preserving unsigned key so bisection can run
// over representable values rather than over reals.
inline std::uint64_t ordered_key(double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  return (bits & 0x8000000000000000ULL) ? ~bits : bits | 0x8000000000000000ULL;
}

inline double from_ordered_key(std::uint64_t key) {
  auto bits = (key & 0x8000000000000000ULL) ? key & ~0x8000000000000000ULL : ~key;
  return std::bit_cast<double>(bits);
}

/// Least double y in `support` with cdf(y) >= t, searched around `guess`.
template <class Cdf>
double least_double_reaching(const Cdf& cdf, double t, double guess, Interval support) {
  const double floor_x = std::isfinite(support.lo) ? support.lo : -std::numeric_limits<double>::max();
  const double ceil_x = std::isfinite(support.hi) ? support.hi : std::numeric_limits<double>::max();
  double x0 = std::clamp(std::isfinite(guess) ? guess : 0.0, floor_x, ceil_x);

  double hi = x0;
  double step = std::max(std::abs(x0), 1.0) * 1e-12;
  while (cdf(hi) < t) {
    if (hi >= ceil_x) return ceil_x;
    hi = std::min(ceil_x, hi + step);
    step *= 2.0;
  }
  double lo = hi;
  step = std::max(std::abs(hi), 1.0) * 1e-12;
  while (cdf(lo) >= t) {
    if (lo <= floor_x) return floor_x;
    lo = std::max(floor_x, lo - step);
    step *= 2.0;
  }
  // Invariant: cdf(lo) < t <= cdf(hi).
  auto klo = ordered_key(lo);
  auto khi = ordered_key(hi);
  while (khi - klo > 1) {
    auto kmid = klo + (khi - klo) / 2;
    if (cdf(from_ordered_key(kmid)) >= t) {
      khi = kmid;
    } else {
      klo = kmid;
    }
  }
  return from_ordered_key(khi);
}

inline void require_probability(double t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw ArgumentError("probability must lie in (0,1), got " + shortest(t));
  }
}

// Irwin-Hall piece: sum_{j <= s} (-1)^j C(k, j) (s - j)^power / power!
inline double irwin_hall_piece(unsigned k, double s, unsigned power) {
  double total = 0.0;
  const auto top = static_cast<unsigned>(std::min<double>(std::floor(s), k));
  for (unsigned j = 0; j <= top; ++j) {
    const double term = boost::math::binomial_coefficient<double>(k, j) * std::pow(s - j, power);
    total += (j % 2 == 0) ? term : -term;
  }
  return total / boost::math::factorial<double>(power);
}

}  // namespace detail

inline MarginalModel uniform_marginal() {
  MarginalModel m;
  m.name = "uniform";
  m.support = {0.0, 1.0};
  m.cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  m.pdf = [](double x) { return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0; };
  m.inv_cdf = [](double t) {
    detail::require_probability(t);
    return t;
  };
  m.pdf_derivative_bound = 0.0;
  return m;
}

inline MarginalModel exponential_marginal(double rate = 1.0) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ArgumentError("exponential rate must be positive, got " + shortest(rate));
  }
  MarginalModel m;
  m.name = rate == 1.0 ? "exponential" : "exponential:" + shortest(rate);
  m.support = {0.0, std::numeric_limits<double>::infinity()};
  m.cdf = [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); };
  m.pdf = [rate](double x) { return x < 0.0 ? 0.0 : rate * std::exp(-rate * x); };
  m.inv_cdf = [rate, support = m.support](double t) {
    detail::require_probability(t);
    const double guess = -std::log1p(-t) / rate;
    return detail::least_double_reaching(
        [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }, t, guess, support);
  };
  m.pdf_derivative_bound = rate * rate;
  return m;
}

inline MarginalModel normal_marginal(double mean = 0.0, double sd = 1.0) {
  if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) {
    throw ArgumentError("normal marginal needs finite mean and positive sd");
  }
  const boost::math::normal_distribution<double> law(mean, sd);
  MarginalModel m;
  m.name = (mean == 0.0 && sd == 1.0) ? "normal" : "normal:" + shortest(mean) + ":" + shortest(sd);
  m.cdf = [law](double x) {
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    return boost::math::cdf(law, x);
  };
  m.pdf = [law](double x) { return std::isinf(x) ? 0.0 : boost::math::pdf(law, x); };
  m.inv_cdf = [law, support = m.support](double t) {
    detail::require_probability(t);
    return detail::least_double_reaching([law](double x) { return boost::math::cdf(law, x); }, t,
                                         boost::math::quantile(law, t), support);
  };
  // max |f'| of N(mu, sd^2) is attained at mu +- sd.
  m.pdf_derivative_bound = 1.0 / (sd * sd * std::sqrt(2.0 * M_PI * M_E));
  return m;
}

/// Law of the mean of `k` independent Uniform(0,1) variables.
inline MarginalModel bates_marginal(unsigned k) {
  if (k < 1 || k > 20) {
    throw ArgumentError("bates order must lie in [1, 20], got " + std::to_string(k));
  }
  if (k == 1) {
    auto m = uniform_marginal();
    m.name = "bates:1";
    return m;
  }
  // Evaluate on the left half and reflect; the alternating sum loses accuracy
  // as s approaches k.
  auto cdf = [k](double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (x > 0.5) return 1.0 - detail::irwin_hall_piece(k, k * (1.0 - x), k);
    return detail::irwin_hall_piece(k, k * x, k);
  };
  auto pdf = [k](double x) {
    if (x < 0.0 || x > 1.0) return 0.0;
    const double y = x > 0.5 ? 1.0 - x : x;
    return k * detail::irwin_hall_piece(k, k * y, k - 1);
  };
  MarginalModel m;
  m.name = "bates:" + std::to_string(k);
  m.support = {0.0, 1.0};
  m.cdf = cdf;
  m.pdf = pdf;
  m.inv_cdf = [cdf, support = m.support](double t) {
    detail::require_probability(t);
    boost::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::toms748_solve([&](double x) { return cdf(x) - t; }, 0.0, 1.0,
                                                    boost::math::tools::eps_tolerance<double>(50),
                                                    iters);
    return detail::least_double_reaching(cdf, t, 0.5 * (a + b), support);
  };
  // f'(x) = k^2 * (Irwin-Hall density)'(kx); scan on a fine grid, then pad
  // by the largest change the derivative can make between grid points.
  double bound = 0.0;
  if (k == 2) {
    bound = 4.0;
  } else {
    const int grid = 20000;
    for (int i = 0; i <= grid; ++i) {
      const double s = static_cast<double>(k) * i / grid;
      bound = std::max(bound, std::abs(detail::irwin_hall_piece(k, s, k - 2)));
    }
    bound *= static_cast<double>(k) * k * (1.0 + 1e-3);
  }
  m.pdf_derivative_bound = bound;
  return m;
}

/// Builds a marginal from its descriptor: `uniform`, `exponential[:rate]`,
/// `normal[:mean:sd]`, `bates:k`.
inline MarginalModel make_marginal(std::string_view descriptor) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = descriptor.find(':', start);
    parts.push_back(descriptor.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  const auto kind = parts.front();
  if (kind == "uniform" && parts.size() == 1) return uniform_marginal();
  if (kind == "exponential" && parts.size() <= 2) {
    return exponential_marginal(parts.size() == 2 ? parse_double(parts[1], "rate") : 1.0);
  }
  if (kind == "normal" && (parts.size() == 1 || parts.size() == 3)) {
    if (parts.size() == 1) return normal_marginal();
    return normal_marginal(parse_double(parts[1], "mean"), parse_double(parts[2], "sd"));
  }
  if (kind == "bates" && parts.size() == 2) {
    const double k = parse_double(parts[1], "bates order");
    if (k != std::floor(k) || k < 1) throw ArgumentError("bates order must be a positive integer");
    return bates_marginal(static_cast<unsigned>(k));
  }
  throw SpecError("unknown marginal descriptor '" + std::string(descriptor) + "'");
}

}  // namespace phiq

#endif  // PHIQ_MARGINAL_HPP
