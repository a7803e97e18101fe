#ifndef PHIQ_VAR_HPP
#define PHIQ_VAR_HPP

#include <cmath>
#include <istream>
#include <string>
#include <vector>

#include "phiq/empirical.hpp"
#include "phiq/errors.hpp"
#include "phiq/format.hpp"

namespace phiq {

enum class SeriesMode { returns_given, prices_given };

struct VarResult {
  double var = 0.0;              // sample p-quantile of the returns
  std::size_t n = 0;             // number of returns
  double remainder_order = 0.0;  // (log n / n)^{1/2}; an order annotation, not an interval
  bool quantile_is_minimum = false;  // n p < 1, so v_p is the smallest return
};

/// Y_t = log(X_t / X_{t-1})
inline std::vector<double> log_returns(const std::vector<double>& prices) {
  if (prices.size() < 2) throw DataError("at least two prices are needed for a return");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      throw DataError("price at position " + std::to_string(i) + " is not strictly positive: " + shortest(prices[i]));
    }
  }
  std::vector<double> out(prices.size() - 1);
  for (std::size_t i = 1; i < prices.size(); ++i) out[i - 1] = std::log(prices[i] / prices[i - 1]);
  return out;
}

/// v_p = inf{x : F_n(x) >= p} over the return series. The raw left-tail
/// quantile is reported; converting it to a positive loss is left to callers.
inline VarResult var_estimate(const std::vector<double>& series, double p, SeriesMode mode) {
  const auto returns = mode == SeriesMode::prices_given ? log_returns(series) : series;
  if (returns.empty()) throw DataError("empty return series");
  const EmpiricalCdf cdf(returns);
  VarResult r;
  r.n = returns.size();
  r.var = sample_quantile(cdf, p).value;
  const auto nd = static_cast<double>(r.n);
  r.remainder_order = r.n > 1 ? std::sqrt(std::log(nd) / nd) : 0.0;
  r.quantile_is_minimum = static_cast<double>(r.n) * p < 1.0;
  return r;
}

/// One value per line. Blank lines and '#' comments are skipped, as is a
/// single non-numeric header line before the first value.
inline std::vector<double> read_series(std::istream& in) {
  std::vector<double> out;
  std::string line;
  int lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto comma = line.find(',');
    const std::string cell = line.substr(0, comma);
    try {
      out.push_back(parse_double(cell, "value"));
    } catch (const DataError&) {
      if (!header_allowed) throw DataError("line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
    }
    header_allowed = false;
  }
  return out;
}

}  // namespace phiq

#endif  // PHIQ_VAR_HPP
