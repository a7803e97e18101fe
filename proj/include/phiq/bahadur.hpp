#ifndef PHIQ_BAHADUR_HPP
#define PHIQ_BAHADUR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "phiq/empirical.hpp"
#include "phiq/errors.hpp"
#include "phiq/format.hpp"
#include "phiq/marginal.hpp"
#include "phiq/process.hpp"

// All logarithms are natural.

namespace phiq {

enum class WindowKind {
  oscillation,    // D_n = [xi_p - a_n, xi_p + a_n]
  extended,       // E_n = [xi_p - tau_n, xi_p + tau_n]
  quantile_band,  // [xi_p - eps_n, xi_p + eps_n]
};

/// Free positive constants of the windows and envelopes.
struct WindowConstants {
  double c0 = 1.0;     // scale of a_n
  double theta = 1.0;  // slack in 16 C_3 + theta
  double delta = 0.1;  // slack in 2 sqrt(C_3) + delta
};

/// a_n = C_0 n^{-1/2} (log n)^{3/4}
inline double oscillation_half_width(double n, double c0) {
  return c0 * std::pow(n, -0.5) * std::pow(std::log(n), 0.75);
}

/// tau_n = sqrt(16 C_3 + theta) (log n)^{3/2} / (n^{1/2} (log log n)^{1/2}); needs n >= 16.
inline double extended_half_width(double n, double c3, double theta) {
  if (n < 16) throw ArgumentError("extended window needs n >= 16 so that log log n > 0");
  const double ln = std::log(n);
  return std::sqrt(16.0 * c3 + theta) * std::pow(ln, 1.5) / (std::sqrt(n) * std::sqrt(std::log(ln)));
}

/// eps_n = (2 sqrt(C_3) + delta) (log n)^{1/2} / (f(xi_p) n^{1/2})
inline double quantile_band_half_width(double n, double c3, double delta, double f_xi) {
  return (2.0 * std::sqrt(c3) + delta) * std::sqrt(std::log(n)) / (f_xi * std::sqrt(n));
}

struct WindowSpec {
  WindowKind kind = WindowKind::oscillation;
  double half_width = 0.0;
  double center = 0.0;
  WindowConstants constants;
  double c3 = 4.0;
  double f_xi = 1.0;

  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
};

inline WindowSpec window(WindowKind kind, std::size_t n, const MarginalModel& marginal, double p, double c3,
                         WindowConstants constants = {}) {
  if (n < 2) throw ArgumentError("window needs n >= 2");
  WindowSpec w;
  w.kind = kind;
  w.center = marginal.inv_cdf(p);
  w.constants = constants;
  w.c3 = c3;
  w.f_xi = marginal.pdf(w.center);
  const auto nd = static_cast<double>(n);
  switch (kind) {
    case WindowKind::oscillation:
      w.half_width = oscillation_half_width(nd, constants.c0);
      break;
    case WindowKind::extended:
      w.half_width = extended_half_width(nd, c3, constants.theta);
      break;
    case WindowKind::quantile_band:
      if (!(w.f_xi > 0.0)) throw DomainError("density vanishes at the quantile");
      w.half_width = quantile_band_half_width(nd, c3, constants.delta, w.f_xi);
      break;
  }
  return w;
}

enum class EnvelopeKind {
  thm21,      // (d + 4 C_3) n^{-3/4} log n
  thm23,      // (1 + d) ((16 C_3 + theta) log n / n)^{1/2}
  thm24,      // (1 + d) ((16 C_3 + theta) log n / (4n))^{1/2}
  thm15_iid,  // n^{-3/4} (log n)^{3/4}, unscaled i.i.d. modulus
};

inline double envelope(EnvelopeKind kind, double n, double d, double c3, double theta) {
  if (!(n >= 2)) throw ArgumentError("envelope needs n >= 2");
  const double ln = std::log(n);
  switch (kind) {
    case EnvelopeKind::thm15_iid:
      return std::pow(n, -0.75) * std::pow(ln, 0.75);
    case EnvelopeKind::thm21:
      if (!(d > 0.0) || !(c3 >= 4.0)) throw ArgumentError("envelope needs d > 0 and C_3 >= 4");
      return (d + 4.0 * c3) * std::pow(n, -0.75) * ln;
    case EnvelopeKind::thm23:
    case EnvelopeKind::thm24: {
      if (!(d > 0.0) || !(c3 >= 4.0) || !(theta > 0.0)) {
        throw ArgumentError("envelope needs d > 0, C_3 >= 4 and theta > 0");
      }
      const double base = (1.0 + d) * std::sqrt((16.0 * c3 + theta) * ln / n);
      // Dividing by 4 under the root is an exact halving in binary floating point.
      return kind == EnvelopeKind::thm23 ? base : base / 2.0;
    }
  }
  return 0.0;
}

/// A supremum over a window, and whether the window had to be clipped to the
/// marginal's support.
struct WindowSup {
  double value = 0.0;
  bool clipped = false;
};

/// sup over x in [lo, hi] of |F_n(x) - F(x) - offset|, computed exactly.
///
/// Between consecutive sample points F_n is constant and F nondecreasing, so
/// F_n - F is monotone on each piece and its extremes sit at the piece ends:
/// lo, hi, and every sample point in (lo, hi] taken with F_n(x) and F_n(x-).
template <class Cdf>
double sup_abs_deviation(const EmpiricalCdf& ecdf, const Cdf& cdf, double lo, double hi, double offset) {
  if (hi < lo) throw ArgumentError("window upper end below lower end");
  const auto& v = ecdf.sorted_values();
  const auto n = static_cast<double>(v.size());
  double best = std::abs(ecdf(lo) - cdf(lo) - offset);
  best = std::max(best, std::abs(ecdf(hi) - cdf(hi) - offset));
  auto i = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), lo) - v.begin());
  while (i < v.size() && v[i] <= hi) {
    const double x = v[i];
    const std::size_t first = i;
    while (i < v.size() && v[i] == x) ++i;
    const double fx = cdf(x);
    best = std::max(best, std::abs(static_cast<double>(i) / n - fx - offset));
    best = std::max(best, std::abs(static_cast<double>(first) / n - fx - offset));
  }
  return best;
}

namespace detail {
inline std::pair<double, double> clip(const WindowSpec& w, const MarginalModel& marginal, bool& clipped) {
  const double lo = std::max(w.lo(), marginal.support.lo);
  const double hi = std::min(w.hi(), marginal.support.hi);
  clipped = lo != w.lo() || hi != w.hi();
  return {lo, hi};
}
}  // namespace detail

/// H_{p,n} = sup over the window of |(F_n(x) - F(x)) - (F_n(xi_p) - p)|.
inline WindowSup oscillation_sup(const EmpiricalCdf& ecdf, const MarginalModel& marginal, double p,
                                 const WindowSpec& w) {
  if (!(w.half_width >= 0.0)) throw ArgumentError("window half-width must be nonnegative");
  WindowSup out;
  auto [lo, hi] = detail::clip(w, marginal, out.clipped);
  const double xi = marginal.inv_cdf(p);
  out.value = sup_abs_deviation(ecdf, marginal.cdf, lo, hi, ecdf(xi) - p);
  return out;
}

inline WindowSup oscillation_sup(const SamplePath& path, const MarginalModel& marginal, double p,
                                 const WindowSpec& w) {
  return oscillation_sup(build_ecdf(path), marginal, p, w);
}

/// sup over the window of |F_n(x) - F(x)|.
inline WindowSup sup_deviation(const EmpiricalCdf& ecdf, const MarginalModel& marginal, const WindowSpec& w) {
  WindowSup out;
  auto [lo, hi] = detail::clip(w, marginal, out.clipped);
  out.value = sup_abs_deviation(ecdf, marginal.cdf, lo, hi, 0.0);
  return out;
}

/// sup of the density over [lo, hi]: endpoints, centre and a Brent
/// (golden-section with parabolic steps) search, which is exact for the
/// unimodal marginals shipped here.
inline double sup_density(const MarginalModel& marginal, double lo, double hi) {
  lo = std::max(lo, marginal.support.lo);
  hi = std::min(hi, marginal.support.hi);
  double best = std::max(marginal.pdf(lo), marginal.pdf(hi));
  if (hi > lo) {
    best = std::max(best, marginal.pdf(0.5 * (lo + hi)));
    auto [x, neg] = boost::math::tools::brent_find_minima([&](double t) { return -marginal.pdf(t); }, lo, hi, 40);
    best = std::max(best, -neg);
  }
  return best;
}

/// R_n = xi_{p,n} - xi_p + (F_n(xi_p) - p) / f(xi_p).
inline double remainder(const EmpiricalCdf& ecdf, const MarginalModel& marginal, double p) {
  const double xi = marginal.inv_cdf(p);
  const double f = marginal.pdf(xi);
  if (!(f > 0.0)) throw DomainError("density vanishes at xi_p = " + shortest(xi) + "; representation undefined");
  return sample_quantile(ecdf, p).value - xi + (ecdf(xi) - p) / f;
}

inline double remainder(const SamplePath& path, const MarginalModel& marginal, double p) {
  return remainder(build_ecdf(path), marginal, p);
}

struct SandwichCheck {
  bool holds = false;
  double fn_at_xi = 0.0;
};

/// Checks p <= F_n(xi_{p,n}) < p + 1/n. The lower side compares against F_n
/// as evaluated (fl(k/n)); the upper side is tested as fl((k-1)/n) < p, which
/// for a double p is equivalent to the exact k/n < p + 1/n. Requires
/// pairwise-distinct values.
inline SandwichCheck lemma34_check(const EmpiricalCdf& ecdf, double p) {
  if (ecdf.has_ties()) throw HypothesisError("sandwich check requires pairwise-distinct values");
  const auto q = sample_quantile(ecdf, p);
  const auto n = ecdf.size();
  const auto k = ecdf.count_le(q.value);
  const bool lower = p <= step_level(k, n);
  const bool upper = step_level(k - 1, n) < p;
  return {lower && upper, step_level(k, n)};
}

inline SandwichCheck lemma34_check(const SamplePath& path, double p) { return lemma34_check(build_ecdf(path), p); }

struct DeviationCheck {
  double deviation = 0.0;
  double bound = 0.0;
  bool within = false;
};

/// |xi_{p,n} - xi_p| against eps_n.
inline DeviationCheck lemma33_deviation_check(const EmpiricalCdf& ecdf, const MarginalModel& marginal, double p,
                                              double delta, double c3) {
  const double xi = marginal.inv_cdf(p);
  const double f = marginal.pdf(xi);
  if (!(f > 0.0)) throw DomainError("density vanishes at xi_p = " + shortest(xi));
  DeviationCheck out;
  out.deviation = std::abs(sample_quantile(ecdf, p).value - xi);
  out.bound = quantile_band_half_width(static_cast<double>(ecdf.size()), c3, delta, f);
  out.within = out.deviation <= out.bound;
  return out;
}

inline DeviationCheck lemma33_deviation_check(const SamplePath& path, const MarginalModel& marginal, double p,
                                              double delta, double c3) {
  return lemma33_deviation_check(build_ecdf(path), marginal, p, delta, c3);
}

struct EnvelopeValues {
  double thm21 = 0.0;
  double thm23 = 0.0;
  double thm24 = 0.0;
  double lemma33 = 0.0;
};

struct EnvelopeViolations {
  bool thm21 = false;    // H over D_n
  bool thm23 = false;    // oscillation over E_n
  bool thm24 = false;    // sup |F_n - F| over E_n
  bool lemma33 = false;  // |xi_{p,n} - xi_p|
};

/// Everything computed for one path at one probability level.
struct BahadurDiagnostics {
  std::size_t n = 0;
  double p = 0.0;
  double xi_p = 0.0;
  double xi_pn = 0.0;
  double f_xi = 0.0;
  double remainder = 0.0;
  double oscillation = 0.0;     // H_{p,n} over D_n
  double oscillation_En = 0.0;  // same statistic over E_n
  double sup_dev_window = 0.0;  // sup |F_n - F| over E_n
  double a_n = 0.0;
  double tau_n = 0.0;
  double eps_n = 0.0;
  double d_Dn = 0.0;  // sup f on D_n
  double d_En = 0.0;  // sup f on E_n
  bool clipped_Dn = false;
  bool clipped_En = false;
  EnvelopeValues envelopes;
  EnvelopeViolations violations;
};

inline BahadurDiagnostics diagnose(const EmpiricalCdf& ecdf, const MarginalModel& marginal, double p, double c3,
                                   WindowConstants constants = {}) {
  const std::size_t n = ecdf.size();
  if (n < 16) throw ArgumentError("diagnostics need n >= 16");
  BahadurDiagnostics d;
  d.n = n;
  d.p = p;
  d.xi_p = marginal.inv_cdf(p);
  d.f_xi = marginal.pdf(d.xi_p);
  if (!(d.f_xi > 0.0)) throw DomainError("density vanishes at xi_p = " + shortest(d.xi_p));
  d.xi_pn = sample_quantile(ecdf, p).value;
  d.remainder = d.xi_pn - d.xi_p + (ecdf(d.xi_p) - p) / d.f_xi;

  const auto dn = window(WindowKind::oscillation, n, marginal, p, c3, constants);
  const auto en = window(WindowKind::extended, n, marginal, p, c3, constants);
  d.a_n = dn.half_width;
  d.tau_n = en.half_width;
  d.eps_n = quantile_band_half_width(static_cast<double>(n), c3, constants.delta, d.f_xi);

  const auto h_dn = oscillation_sup(ecdf, marginal, p, dn);
  const auto h_en = oscillation_sup(ecdf, marginal, p, en);
  const auto s_en = sup_deviation(ecdf, marginal, en);
  d.oscillation = h_dn.value;
  d.oscillation_En = h_en.value;
  d.sup_dev_window = s_en.value;
  d.clipped_Dn = h_dn.clipped;
  d.clipped_En = h_en.clipped;

  d.d_Dn = sup_density(marginal, dn.lo(), dn.hi());
  d.d_En = sup_density(marginal, en.lo(), en.hi());

  const auto nd = static_cast<double>(n);
  d.envelopes.thm21 = envelope(EnvelopeKind::thm21, nd, d.d_Dn, c3, constants.theta);
  d.envelopes.thm23 = envelope(EnvelopeKind::thm23, nd, d.d_En, c3, constants.theta);
  d.envelopes.thm24 = envelope(EnvelopeKind::thm24, nd, d.d_En, c3, constants.theta);
  d.envelopes.lemma33 = d.eps_n;

  d.violations.thm21 = d.oscillation > d.envelopes.thm21;
  d.violations.thm23 = d.oscillation_En > d.envelopes.thm23;
  d.violations.thm24 = d.sup_dev_window > d.envelopes.thm24;
  d.violations.lemma33 = std::abs(d.xi_pn - d.xi_p) > d.eps_n;
  return d;
}

/// Quotes a CSV cell when it holds a comma or quote (Markov spec ids do).
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

/// Diagnostics of one path, with the inputs that regenerate it.
struct DiagnosticsRow {
  std::string spec_id;
  std::uint64_t seed = 0;
  BahadurDiagnostics d;
};

inline void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRow>& rows) {
  out << "spec_id,seed,n,p,xi_p,xi_pn,R_n,H_pn,H_pn_En,sup_dev,env_thm21,env_thm23,env_thm24,env_lemma33,"
         "viol_thm21,viol_thm23,viol_thm24,viol_lemma33\n";
  for (const auto& r : rows) {
    const auto& d = r.d;
    out << csv_field(r.spec_id) << ',' << r.seed << ',' << d.n << ',' << sig17(d.p) << ',' << sig17(d.xi_p) << ','
        << sig17(d.xi_pn) << ',' << sig17(d.remainder) << ',' << sig17(d.oscillation) << ','
        << sig17(d.oscillation_En) << ',' << sig17(d.sup_dev_window) << ',' << sig17(d.envelopes.thm21) << ','
        << sig17(d.envelopes.thm23) << ',' << sig17(d.envelopes.thm24) << ',' << sig17(d.envelopes.lemma33) << ','
        << d.violations.thm21 << ',' << d.violations.thm23 << ',' << d.violations.thm24 << ','
        << d.violations.lemma33 << '\n';
  }
}

}  // namespace phiq

#endif  // PHIQ_BAHADUR_HPP
