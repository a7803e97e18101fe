#ifndef PHIQ_EXPERIMENT_HPP
#define PHIQ_EXPERIMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phiq/bahadur.hpp"
#include "phiq/empirical.hpp"
#include "phiq/errors.hpp"
#include "phiq/format.hpp"
#include "phiq/kv.hpp"
#include "phiq/parallel.hpp"
#include "phiq/process.hpp"
#include "phiq/rng.hpp"

namespace phiq {

inline constexpr std::string_view kVersion = "phiq 1.0.0";

enum class Statistic { abs_remainder, oscillation_Dn, oscillation_En, sup_dev_En };
enum class Aggregate { median, q90, q99, max };
enum class EnvelopeChoice { thm21, thm23, thm24, lemma33 };

inline std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::abs_remainder: return "abs_remainder";
    case Statistic::oscillation_Dn: return "oscillation_Dn";
    case Statistic::oscillation_En: return "oscillation_En";
    case Statistic::sup_dev_En: return "sup_dev_En";
  }
  return "?";
}

inline std::string to_string(Aggregate a) {
  switch (a) {
    case Aggregate::median: return "median";
    case Aggregate::q90: return "q90";
    case Aggregate::q99: return "q99";
    case Aggregate::max: return "max";
  }
  return "?";
}

inline std::string to_string(EnvelopeChoice e) {
  switch (e) {
    case EnvelopeChoice::thm21: return "thm21";
    case EnvelopeChoice::thm23: return "thm23";
    case EnvelopeChoice::thm24: return "thm24";
    case EnvelopeChoice::lemma33: return "lemma33";
  }
  return "?";
}

inline Statistic parse_statistic(std::string_view s) {
  for (auto v : {Statistic::abs_remainder, Statistic::oscillation_Dn, Statistic::oscillation_En, Statistic::sup_dev_En})
    if (to_string(v) == s) return v;
  throw ArgumentError("unknown statistic '" + std::string(s) + "'");
}

inline Aggregate parse_aggregate(std::string_view s) {
  for (auto v : {Aggregate::median, Aggregate::q90, Aggregate::q99, Aggregate::max})
    if (to_string(v) == s) return v;
  throw ArgumentError("unknown aggregate '" + std::string(s) + "'");
}

inline EnvelopeChoice parse_envelope(std::string_view s) {
  for (auto v : {EnvelopeChoice::thm21, EnvelopeChoice::thm23, EnvelopeChoice::thm24, EnvelopeChoice::lemma33})
    if (to_string(v) == s) return v;
  throw ArgumentError("unknown envelope '" + std::string(s) + "'");
}

/// The envelope each statistic is compared against unless overridden.
inline EnvelopeChoice default_envelope(Statistic s) {
  switch (s) {
    case Statistic::abs_remainder:
    case Statistic::oscillation_Dn: return EnvelopeChoice::thm21;
    case Statistic::oscillation_En: return EnvelopeChoice::thm23;
    case Statistic::sup_dev_En: return EnvelopeChoice::thm24;
  }
  return EnvelopeChoice::thm21;
}

/// n = 2^lo, 2^(lo+1), ..., 2^hi
inline std::vector<std::size_t> power_of_two_grid(unsigned lo, unsigned hi) {
  std::vector<std::size_t> grid;
  for (unsigned k = lo; k <= hi; ++k) grid.push_back(std::size_t{1} << k);
  return grid;
}

struct RunConfig {
  ProcessSpec spec = ProcessSpec::iid(uniform_marginal());
  std::vector<double> p_list{0.5};
  std::vector<std::size_t> n_grid = power_of_two_grid(10, 17);
  std::size_t reps = 200;
  std::uint64_t master_seed = 20240601;
  Statistic statistic = Statistic::abs_remainder;
  Aggregate aggregate = Aggregate::median;
  std::optional<EnvelopeChoice> envelope;  // default_envelope(statistic) when unset
  WindowConstants constants;
  double beta = 0.25;
  // Guard on sum(n_grid) * reps.
  double sample_budget = 4e9;
  bool allow_over_budget = false;

  EnvelopeChoice envelope_choice() const { return envelope.value_or(default_envelope(statistic)); }
};

/// Canonical key-value form of a run configuration (without thread count,
/// which never affects results).
inline KeyValues to_key_values(const RunConfig& c) {
  KeyValues kv = to_key_values(c.spec);
  auto join = [](const auto& xs, auto fmt) {
    std::string out;
    for (const auto& x : xs) {
      if (!out.empty()) out += ',';
      out += fmt(x);
    }
    return out;
  };
  kv["p"] = join(c.p_list, [](double p) { return shortest(p); });
  kv["n_grid"] = join(c.n_grid, [](std::size_t n) { return std::to_string(n); });
  kv["reps"] = std::to_string(c.reps);
  kv["master_seed"] = std::to_string(c.master_seed);
  kv["statistic"] = to_string(c.statistic);
  kv["aggregate"] = to_string(c.aggregate);
  kv["envelope"] = to_string(c.envelope_choice());
  kv["c0"] = shortest(c.constants.c0);
  kv["theta"] = shortest(c.constants.theta);
  kv["delta"] = shortest(c.constants.delta);
  kv["beta"] = shortest(c.beta);
  return kv;
}

/// 64-bit FNV-1a of the canonical configuration text.
inline std::uint64_t config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [key, value] : to_key_values(c)) {
    for (char ch : key + "=" + value + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

inline std::vector<double> parse_double_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    out.push_back(parse_double(text.substr(start, end == std::string_view::npos ? end : end - start), what));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

inline std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return v;
}

/// Builds a RunConfig from key-value pairs; unknown keys are rejected.
/// Keys: generator, marginal, m, transition, p, n_grid | (n_min, n_max),
/// reps, master_seed, statistic, aggregate, envelope, c0, theta, delta, beta,
/// sample_budget.
inline RunConfig run_config_from(const KeyValues& kv) {
  static const std::vector<std::string> known = {
      "generator", "marginal", "m",     "transition", "p",     "n_grid", "n_min", "n_max",        "reps",
      "master_seed", "seed",   "statistic", "aggregate", "envelope", "c0", "theta", "delta", "beta", "sample_budget"};
  for (const auto& [key, value] : kv) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ArgumentError("unknown config key '" + key + "'");
  }
  RunConfig c;
  if (kv.count("generator")) c.spec = process_spec_from(kv);
  auto has = [&](const char* key) { return kv.count(key) > 0; };
  if (has("p")) c.p_list = parse_double_list(kv.at("p"), "p");
  if (has("n_grid")) {
    c.n_grid.clear();
    for (double n : parse_double_list(kv.at("n_grid"), "n_grid")) {
      if (n < 1 || n != std::floor(n)) throw ArgumentError("n_grid entries must be positive integers");
      c.n_grid.push_back(static_cast<std::size_t>(n));
    }
  } else if (has("n_min") || has("n_max")) {
    const auto lo = has("n_min") ? parse_u64(kv.at("n_min"), "n_min") : 1024;
    const auto hi = has("n_max") ? parse_u64(kv.at("n_max"), "n_max") : 131072;
    c.n_grid.clear();
    for (std::uint64_t n = lo; n <= hi; n *= 2) c.n_grid.push_back(n);
  }
  if (has("reps")) c.reps = parse_u64(kv.at("reps"), "reps");
  if (has("master_seed")) c.master_seed = parse_u64(kv.at("master_seed"), "master_seed");
  if (has("seed")) c.master_seed = parse_u64(kv.at("seed"), "seed");
  if (has("statistic")) c.statistic = parse_statistic(kv.at("statistic"));
  if (has("aggregate")) c.aggregate = parse_aggregate(kv.at("aggregate"));
  if (has("envelope")) c.envelope = parse_envelope(kv.at("envelope"));
  if (has("c0")) c.constants.c0 = parse_double(kv.at("c0"), "c0");
  if (has("theta")) c.constants.theta = parse_double(kv.at("theta"), "theta");
  if (has("delta")) c.constants.delta = parse_double(kv.at("delta"), "delta");
  if (has("beta")) c.beta = parse_double(kv.at("beta"), "beta");
  if (has("sample_budget")) c.sample_budget = parse_double(kv.at("sample_budget"), "sample_budget");
  return c;
}

inline void validate(const RunConfig& c) {
  if (c.n_grid.empty()) throw ArgumentError("n_grid is empty");
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
    if (c.n_grid[i] < 16) throw ArgumentError("every n in n_grid must be >= 16");
    if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1]) throw ArgumentError("n_grid must be strictly increasing");
  }
  if (c.p_list.empty()) throw ArgumentError("p list is empty");
  for (double p : c.p_list) {
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError("p must lie in (0,1), got " + shortest(p));
  }
  if (c.reps == 0) throw ArgumentError("reps must be >= 1");
  if (!(c.constants.c0 > 0.0) || !(c.constants.theta > 0.0) || !(c.constants.delta > 0.0)) {
    throw ArgumentError("c0, theta and delta must be positive");
  }
  double total = 0.0;
  for (auto n : c.n_grid) total += static_cast<double>(n);
  total *= static_cast<double>(c.reps);
  if (total > c.sample_budget && !c.allow_over_budget) {
    throw BudgetError("configuration draws " + sig17(total) + " samples, above the budget of " +
                      sig17(c.sample_budget) + "; raise sample_budget or pass the override flag");
  }
}

struct ReportRow {
  std::size_t n = 0;
  double p = 0.0;
  double statistic = 0.0;  // aggregated over replications
  double envelope = 0.0;
  double violation_fraction = 0.0;
  std::size_t reps = 0;

  bool operator==(const ReportRow&) const = default;
};

struct ReportMetadata {
  std::string config_hash;  // 16 hex digits
  std::uint64_t master_seed = 0;
  std::string version{kVersion};
  std::string spec_id;
  std::string statistic;
  std::string aggregate;
  std::string envelope;

  bool operator==(const ReportMetadata&) const = default;
};

struct ReportTable {
  ReportMetadata metadata;
  std::vector<ReportRow> rows;

  bool operator==(const ReportTable&) const = default;
};

/// One replication's statistic, its envelope and whether it was exceeded.
struct ReplicationRecord {
  std::size_t n = 0;
  double p = 0.0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double value = 0.0;
  double envelope = 0.0;
  bool violated = false;
};

struct ExperimentResult {
  ReportTable table;
  std::vector<ReplicationRecord> replications;  // ordered by (n, p, rep)
};

inline double aggregate(std::vector<double> values, Aggregate how) {
  if (values.empty()) throw ArgumentError("cannot aggregate an empty sample");
  const EmpiricalCdf cdf(values);
  switch (how) {
    case Aggregate::median: return sample_quantile(cdf, 0.5).value;
    case Aggregate::q90: return sample_quantile(cdf, 0.9).value;
    case Aggregate::q99: return sample_quantile(cdf, 0.99).value;
    case Aggregate::max: return cdf.sorted_values().back();
  }
  return 0.0;
}

inline double select_statistic(const BahadurDiagnostics& d, Statistic s) {
  switch (s) {
    case Statistic::abs_remainder: return std::abs(d.remainder);
    case Statistic::oscillation_Dn: return d.oscillation;
    case Statistic::oscillation_En: return d.oscillation_En;
    case Statistic::sup_dev_En: return d.sup_dev_window;
  }
  return 0.0;
}

inline double select_envelope(const BahadurDiagnostics& d, EnvelopeChoice e) {
  switch (e) {
    case EnvelopeChoice::thm21: return d.envelopes.thm21;
    case EnvelopeChoice::thm23: return d.envelopes.thm23;
    case EnvelopeChoice::thm24: return d.envelopes.thm24;
    case EnvelopeChoice::lemma33: return d.envelopes.lemma33;
  }
  return 0.0;
}

inline std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Runs every (n, p) cell of the grid. The path for replication r at size n
/// has seed derive_seed(master_seed, r, n) and is shared by all p; results are
/// a pure function of the configuration, whatever the thread count.
inline ExperimentResult run_experiment(const RunConfig& config, unsigned threads = default_threads()) {
  validate(config);
  const double c3 = config.spec.mixing().c3();
  const auto& marginal = config.spec.marginal();
  const std::size_t np = config.p_list.size();
  const auto envelope_kind = config.envelope_choice();

  ExperimentResult result;
  auto& meta = result.table.metadata;
  meta.config_hash = hex16(config_hash(config));
  meta.master_seed = config.master_seed;
  meta.spec_id = config.spec.id();
  meta.statistic = to_string(config.statistic);
  meta.aggregate = to_string(config.aggregate);
  meta.envelope = to_string(envelope_kind);

  for (std::size_t n : config.n_grid) {
    // slot [rep * np + j] holds replication rep at level p_list[j]
    std::vector<ReplicationRecord> cell(config.reps * np);
    parallel_for(config.reps, threads, [&](std::size_t rep) {
      const std::uint64_t seed = derive_seed(config.master_seed, rep, n);
      const EmpiricalCdf ecdf(generate(config.spec, n, seed).values);
      for (std::size_t j = 0; j < np; ++j) {
        const auto d = diagnose(ecdf, marginal, config.p_list[j], c3, config.constants);
        auto& rec = cell[rep * np + j];
        rec = {n, config.p_list[j], rep, seed, select_statistic(d, config.statistic), select_envelope(d, envelope_kind),
               false};
        rec.violated = rec.value > rec.envelope;
      }
    });
    for (std::size_t j = 0; j < np; ++j) {
      std::vector<double> values(config.reps);
      std::size_t violations = 0;
      double env = 0.0;
      for (std::size_t rep = 0; rep < config.reps; ++rep) {
        const auto& rec = cell[rep * np + j];
        values[rep] = rec.value;
        violations += rec.violated ? 1 : 0;
        env = std::max(env, rec.envelope);
      }
      result.table.rows.push_back({n, config.p_list[j], aggregate(std::move(values), config.aggregate), env,
                                   static_cast<double>(violations) / static_cast<double>(config.reps), config.reps});
    }
    for (std::size_t j = 0; j < np; ++j)
      for (std::size_t rep = 0; rep < config.reps; ++rep) result.replications.push_back(cell[rep * np + j]);
  }
  return result;
}

}  // namespace phiq

#endif  // PHIQ_EXPERIMENT_HPP
