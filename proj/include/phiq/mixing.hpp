#ifndef PHIQ_MIXING_HPP
#define PHIQ_MIXING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phiq/errors.hpp"
#include "phiq/format.hpp"

namespace phiq {

/// Dense row-major K x K matrix of transition probabilities.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  explicit TransitionMatrix(std::size_t k) : k_(k), a_(k * k, 0.0) {}
  TransitionMatrix(std::size_t k, std::vector<double> entries) : k_(k), a_(std::move(entries)) {
    if (k == 0 || a_.size() != k * k) throw SpecError("transition matrix must be K x K with K >= 1");
  }

  static TransitionMatrix identity(std::size_t k) {
    TransitionMatrix m(k);
    for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0;
    return m;
  }

  /// Symmetric two-state chain that switches state with probability `a`.
  static TransitionMatrix two_state(double a) {
    if (!(a >= 0.0 && a <= 1.0)) throw SpecError("switch probability must lie in [0,1]");
    return TransitionMatrix(2, {1.0 - a, a, a, 1.0 - a});
  }

  /// Parses rows separated by ';' with entries separated by ','.
  static TransitionMatrix parse(std::string_view text) {
    std::vector<std::vector<double>> rows;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find(';', start);
      auto row_text = text.substr(start, end == std::string_view::npos ? end : end - start);
      std::vector<double> row;
      std::size_t s = 0;
      while (s <= row_text.size()) {
        auto e = row_text.find(',', s);
        row.push_back(parse_double(row_text.substr(s, e == std::string_view::npos ? e : e - s),
                                   "transition entry"));
        if (e == std::string_view::npos) break;
        s = e + 1;
      }
      rows.push_back(std::move(row));
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
    const std::size_t k = rows.size();
    std::vector<double> flat;
    for (const auto& row : rows) {
      if (row.size() != k) throw SpecError("transition matrix must be square");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return TransitionMatrix(k, std::move(flat));
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < k_; ++i) {
      if (i) out += ';';
      for (std::size_t j = 0; j < k_; ++j) {
        if (j) out += ',';
        out += shortest((*this)(i, j));
      }
    }
    return out;
  }

  std::size_t states() const noexcept { return k_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * k_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * k_ + j]; }
  const std::vector<double>& entries() const noexcept { return a_; }

  friend TransitionMatrix operator*(const TransitionMatrix& lhs, const TransitionMatrix& rhs) {
    const std::size_t k = lhs.k_;
    TransitionMatrix out(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l) {
        const double a = lhs(i, l);
        for (std::size_t j = 0; j < k; ++j) out(i, j) += a * rhs(l, j);
      }
    return out;
  }

  bool operator==(const TransitionMatrix&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<double> a_;
};

/// Structural checks for chains driving the copula generator: rows sum to one,
/// columns sum to one (uniform stationary law) and some power is strictly
/// positive (irreducible and aperiodic). Throws SpecError with a diagnostic.
inline void validate_uniform_ergodic(const TransitionMatrix& p, double tol = 1e-12) {
  const std::size_t k = p.states();
  if (k == 0) throw SpecError("transition matrix is empty");
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0;
    double col = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (!(p(i, j) >= 0.0 && p(i, j) <= 1.0)) {
        throw SpecError("transition entry (" + std::to_string(i) + "," + std::to_string(j) +
                        ") outside [0,1]");
      }
      row += p(i, j);
      col += p(j, i);
    }
    if (std::abs(row - 1.0) > tol) {
      throw SpecError("row " + std::to_string(i) + " sums to " + shortest(row) + ", not 1");
    }
    if (std::abs(col - 1.0) > tol) {
      throw SpecError("column " + std::to_string(i) + " sums to " + shortest(col) +
                      "; stationary law is not uniform");
    }
  }
  // Primitive iff P^((K-1)^2 + 1) > 0 (Wielandt); track the support pattern only.
  std::vector<char> reach(k * k), step(k * k);
  for (std::size_t i = 0; i < k * k; ++i) reach[i] = step[i] = p.entries()[i] > 0.0;
  const std::size_t limit = (k - 1) * (k - 1) + 1;
  for (std::size_t power = 1;; ++power) {
    if (std::all_of(reach.begin(), reach.end(), [](char c) { return c != 0; })) return;
    if (power >= limit) break;
    std::vector<char> next(k * k, 0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l)
        if (reach[i * k + l])
          for (std::size_t j = 0; j < k; ++j) next[i * k + j] |= step[l * k + j];
    reach = std::move(next);
  }
  throw SpecError("transition matrix is reducible or periodic (no strictly positive power)");
}

/// The mixing-coefficient sequence phi(n), n >= 1, of a stationary process.
///
/// Stored as explicit values for lags 1..L plus a tail model for lags > L:
/// identically zero, geometric continuation phi(L) r^(n-L), or a polynomial
/// envelope K n^(-k).
class MixingProfile {
 public:
  enum class Kind { exact, upper_bound };
  enum class Tail { zero, geometric, polynomial };

  static MixingProfile zero() { return MixingProfile({}, Tail::zero, 0.0, 0.0, Kind::exact); }

  /// Conservative profile of an m-dependent sequence: phi = 1 on lags 1..m.
  static MixingProfile m_dependent(std::size_t m) {
    if (m == 0) throw ArgumentError("m-dependent profile needs m >= 1");
    return MixingProfile(std::vector<double>(m, 1.0), Tail::zero, 0.0, 0.0, Kind::upper_bound);
  }

  /// Explicit values on lags 1..L, zero beyond.
  static MixingProfile finite(std::vector<double> head, Kind kind) {
    return MixingProfile(std::move(head), Tail::zero, 0.0, 0.0, kind);
  }

  static MixingProfile geometric(std::vector<double> head, double ratio, Kind kind) {
    if (head.empty()) throw ArgumentError("geometric profile needs at least one explicit lag");
    if (!(ratio >= 0.0 && ratio < 1.0)) throw ArgumentError("geometric ratio must lie in [0,1)");
    return MixingProfile(std::move(head), Tail::geometric, ratio, 0.0, kind);
  }

  /// phi(n) = scale * n^(-order) for n > head.size().
  static MixingProfile polynomial(std::vector<double> head, double scale, double order, Kind kind) {
    if (!(scale >= 0.0) || !(order > 0.0)) throw ArgumentError("polynomial tail needs scale >= 0, order > 0");
    return MixingProfile(std::move(head), Tail::polynomial, scale, order, kind);
  }

  double phi(std::size_t n) const {
    if (n == 0) throw ArgumentError("mixing lag must be >= 1");
    if (n <= head_.size()) return head_[n - 1];
    switch (tail_) {
      case Tail::zero:
        return 0.0;
      case Tail::geometric:
        return head_.back() * std::pow(tail_a_, static_cast<double>(n - head_.size()));
      case Tail::polynomial:
        return std::min(head_.empty() ? 1.0 : head_.back(), tail_a_ * std::pow(static_cast<double>(n), -tail_b_));
    }
    return 1.0;
  }

  Kind kind() const noexcept { return kind_; }
  Tail tail() const noexcept { return tail_; }
  const std::vector<double>& head() const noexcept { return head_; }
  double tail_ratio() const noexcept { return tail_ == Tail::geometric ? tail_a_ : 0.0; }

  /// k with phi(n) <= K n^(-k) for all n, when one is known. Finite-support
  /// and geometric profiles decay faster than any polynomial.
  std::optional<double> polynomial_order_witness() const {
    if (tail_ == Tail::polynomial) return tail_b_;
    return std::numeric_limits<double>::infinity();
  }

  MixingProfile with_kind(Kind kind) const {
    MixingProfile copy = *this;
    copy.kind_ = kind;
    return copy;
  }

  bool summable() const { return tail_ != Tail::polynomial || tail_b_ > 2.0; }

  /// Sum of phi^(1/2)(n) over n >= 1 with truncation error below `tol`.
  double half_series(double tol = 1e-12) const {
    if (!summable()) {
      throw DomainError("sum of phi^(1/2) diverges for polynomial order " + shortest(tail_b_) + " <= 2");
    }
    double total = 0.0;
    for (double v : head_) total += std::sqrt(v);
    if (tail_ == Tail::geometric) {
      const double r = std::sqrt(tail_a_);
      total += std::sqrt(head_.back()) * r / (1.0 - r);
    } else if (tail_ == Tail::polynomial && tail_a_ > 0.0) {
      // sum_{n > N} sqrt(K) n^(-k/2) <= sqrt(K) N^(1-k/2) / (k/2 - 1)
      const double half = tail_b_ / 2.0;
      auto tail_bound = [&](double n) { return std::sqrt(tail_a_) * std::pow(n, 1.0 - half) / (half - 1.0); };
      std::size_t n = head_.size();
      while (tail_bound(static_cast<double>(std::max<std::size_t>(n, 1))) >= tol) {
        ++n;
        total += std::sqrt(phi(n));
        if (n > 100'000'000) throw NumericError("polynomial tail converges too slowly for tol " + shortest(tol));
      }
    }
    return total;
  }

  /// 4 [1 + 4 sum phi^(1/2)(n)]
  double c3() const { return 4.0 * (1.0 + 4.0 * half_series()); }

 private:
  MixingProfile(std::vector<double> head, Tail tail, double a, double b, Kind kind)
      : head_(std::move(head)), tail_(tail), tail_a_(a), tail_b_(b), kind_(kind) {
    double prev = 1.0;
    for (double v : head_) {
      if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("phi values must lie in [0,1]");
      if (v > prev) throw ArgumentError("phi must be nonincreasing in the lag");
      prev = v;
    }
  }

  std::vector<double> head_;
  Tail tail_;
  double tail_a_;
  double tail_b_;
  Kind kind_;
};

inline double half_series(const MixingProfile& profile, double tol) { return profile.half_series(tol); }

/// D = P - Pi with Pi the matrix whose rows are the uniform stationary law.
/// For a doubly stochastic P, D^n = P^n - Pi, so powers of D carry the
/// distance from stationarity with full relative precision as it decays.
inline TransitionMatrix stationary_deviation(const TransitionMatrix& p) {
  TransitionMatrix d = p;
  const double pi = 1.0 / static_cast<double>(p.states());
  for (std::size_t i = 0; i < p.states(); ++i)
    for (std::size_t j = 0; j < p.states(); ++j) d(i, j) -= pi;
  return d;
}

/// max over future events B of |P^n(row, B) - pi(B)|, given the row of
/// D^n = P^n - Pi. The optimum is B = {j : D^n(row, j) > 0} or its complement.
inline double row_event_distance(const TransitionMatrix& deviation, std::size_t row) {
  double above = 0.0;
  double below = 0.0;
  for (std::size_t j = 0; j < deviation.states(); ++j) {
    const double d = deviation(row, j);
    if (d > 0.0) {
      above += d;
    } else {
      below -= d;
    }
  }
  return std::max(above, below);
}

struct MarkovPhiOptions {
  std::size_t max_lag = 100'000;
  std::size_t min_exact_lags = 64;  // evaluated exactly even when the tail is already negligible
  double tail_tol = 1e-12;
};

/// Exact phi(n) of a stationary finite-state chain with uniform stationary
/// law. Conditioning on a past event mixes the rows of P^n, so the supremum
/// over past events is attained at single states:
///   phi(n) = max_i max_B |P^n(i, B) - pi(B)|.
/// Lags are evaluated until the closed-form geometric tail of
/// sum phi^(1/2), using the last observed decay ratio, falls below `tail_tol`
/// (and at least `min_exact_lags` of them); later lags are extrapolated.
///
/// The profile is marked exact; callers applying it to a coarser observed
/// sequence should downgrade it with `with_kind(Kind::upper_bound)`.
inline MixingProfile phi_markov(const TransitionMatrix& p, MarkovPhiOptions options = {}) {
  validate_uniform_ergodic(p);
  const std::size_t k = p.states();
  const TransitionMatrix step = stationary_deviation(p);
  TransitionMatrix power = step;
  std::vector<double> head;
  double prev = 1.0;
  for (std::size_t lag = 1; lag <= options.max_lag; ++lag) {
    double phi = 0.0;
    for (std::size_t i = 0; i < k; ++i) phi = std::max(phi, row_event_distance(power, i));
    // True distance is nonincreasing in the lag; clamp away rounding wiggle.
    phi = std::clamp(phi, 0.0, prev);
    if (phi == 0.0) return MixingProfile::finite(std::move(head), MixingProfile::Kind::exact);
    head.push_back(phi);
    if (head.size() >= std::max<std::size_t>(3, options.min_exact_lags)) {
      const double ratio = phi / prev;
      const double r = std::sqrt(ratio);
      if (ratio < 1.0 && std::sqrt(phi) * r / (1.0 - r) < options.tail_tol) {
        return MixingProfile::geometric(std::move(head), ratio, MixingProfile::Kind::exact);
      }
    }
    prev = phi;
    power = power * step;
  }
  throw NumericError("phi(n) did not decay below tolerance within " + std::to_string(options.max_lag) + " lags");
}

}  // namespace phiq

#endif  // PHIQ_MIXING_HPP
