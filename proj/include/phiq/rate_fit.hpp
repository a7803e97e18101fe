#ifndef PHIQ_RATE_FIT_HPP
#define PHIQ_RATE_FIT_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phiq/errors.hpp"
#include "phiq/experiment.hpp"
#include "phiq/format.hpp"

namespace phiq {

/// Least-squares line through (log n, log statistic).
struct RateFit {
  std::vector<std::pair<double, double>> points;  // (n, statistic)
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline RateFit fit_rate(std::vector<std::pair<double, double>> points) {
  if (points.size() < 4) throw FitError("rate fit needs at least 4 grid points, got " + std::to_string(points.size()));
  std::string bad;
  for (const auto& [n, y] : points) {
    if (!(n > 0.0) || !(y > 0.0)) bad += (bad.empty() ? "" : ", ") + std::string("n=") + shortest(n) + " (" + shortest(y) + ")";
  }
  if (!bad.empty()) throw FitError("rate fit needs positive statistics; offending rows: " + bad);

  const auto m = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [n, y] : points) {
    mx += std::log(n);
    my += std::log(y);
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [n, y] : points) {
    const double dx = std::log(n) - mx;
    const double dy = std::log(y) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw FitError("rate fit needs at least two distinct n");
  RateFit fit;
  fit.points = std::move(points);
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [n, y] : fit.points) {
    const double r = std::log(y) - (fit.intercept + fit.slope * std::log(n));
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

/// Fits `column` ("statistic" or "envelope") of the rows at level `p`; `p` may
/// be omitted when the table holds a single level.
inline RateFit fit_rate(const ReportTable& table, std::string_view column = "statistic",
                        std::optional<double> p = std::nullopt) {
  if (column != "statistic" && column != "envelope") {
    throw ArgumentError("unknown column '" + std::string(column) + "'");
  }
  if (!p) {
    for (const auto& row : table.rows) {
      if (p && *p != row.p) throw FitError("table holds several p levels; choose one");
      p = row.p;
    }
  }
  std::vector<std::pair<double, double>> points;
  for (const auto& row : table.rows) {
    if (p && row.p != *p) continue;
    if (column == "statistic" && row.reps < 50) {
      throw FitError("rate fits need at least 50 replications per cell (n=" + std::to_string(row.n) + " has " +
                     std::to_string(row.reps) + ")");
    }
    points.emplace_back(static_cast<double>(row.n), column == "statistic" ? row.statistic : row.envelope);
  }
  return fit_rate(std::move(points));
}

struct LevelFit {
  double p = 0.0;
  RateFit fit;
};

/// One fit per probability level, in table order. Levels whose statistics
/// cannot be fitted are reported through `skipped` rather than thrown.
inline std::vector<LevelFit> fit_levels(const ReportTable& table, std::vector<std::string>* skipped = nullptr) {
  std::vector<double> levels;
  for (const auto& row : table.rows) {
    if (std::find(levels.begin(), levels.end(), row.p) == levels.end()) levels.push_back(row.p);
  }
  std::vector<LevelFit> out;
  for (double p : levels) {
    try {
      out.push_back({p, fit_rate(table, "statistic", p)});
    } catch (const FitError& e) {
      if (!skipped) throw;
      skipped->push_back("p=" + shortest(p) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace phiq

#endif  // PHIQ_RATE_FIT_HPP
