// phiq: simulate phi-mixing paths, run Bahadur-remainder experiments, check the
// exponential inequality against Monte Carlo, and estimate VaR from a series.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phiq/phiq.hpp"

namespace {

/// Flags that override keys of the key-value config file.
struct Overrides {
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }
};

phiq::KeyValues load_config(const std::string& path, const Overrides& overrides) {
  phiq::KeyValues kv;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw phiq::IoError("cannot open config '" + path + "'");
    kv = phiq::read_key_values(in);
  }
  for (const auto& [key, value] : overrides.values) kv[key] = value;
  return kv;
}

void add_spec_flags(CLI::App* app, Overrides& o) {
  o.add(app, "--generator", "generator", "iid | m_dependent | markov_copula");
  o.add(app, "--marginal", "marginal", "uniform | exponential[:rate] | normal[:mean:sd] | bates:k");
  o.add(app, "--m", "m", "dependence range of the m-dependent generator");
  o.add(app, "--transition", "transition", "Markov transition matrix, rows ';'-separated, entries ','-separated");
}

phiq::ProcessSpec spec_from(phiq::KeyValues kv) {
  if (!kv.count("generator")) kv["generator"] = "iid";
  if (kv["generator"] != "m_dependent" && !kv.count("marginal")) kv["marginal"] = "uniform";
  return phiq::process_spec_from(kv);
}

void output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    phiq::write_file(path, text);
  }
}

std::uint64_t seed_of(const phiq::KeyValues& kv, std::uint64_t fallback) {
  if (auto it = kv.find("seed"); it != kv.end()) return phiq::parse_u64(it->second, "seed");
  if (auto it = kv.find("master_seed"); it != kv.end()) return phiq::parse_u64(it->second, "master_seed");
  return fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample quantiles and Bahadur remainders under phi-mixing"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a sample path and write it as CSV");
  std::string sim_config, sim_out, sim_spec_out;
  std::size_t sim_n = 1000;
  Overrides sim_flags;
  simulate->add_option("--config", sim_config, "Key-value process spec file");
  add_spec_flags(simulate, sim_flags);
  sim_flags.add(simulate, "--seed", "seed", "Path seed");
  simulate->add_option("-n,--n", sim_n, "Path length")->check(CLI::PositiveNumber);
  simulate->add_option("-o,--out", sim_out, "Output CSV (default stdout)");
  simulate->add_option("--spec-out", sim_spec_out, "Also write the resolved spec as a key-value file");
  std::string sim_diag, sim_p = "0.5";
  simulate->add_option("--diagnostics", sim_diag, "Also write per-level remainder/oscillation diagnostics CSV");
  simulate->add_option("--p", sim_p, "Comma-separated levels for --diagnostics");

  // rates
  auto* rates = app.add_subcommand("rates", "Run a Monte-Carlo grid experiment and fit the log-log rate");
  std::string rates_config, rates_csv, rates_json, rates_fit, rates_reps_csv;
  bool rates_force = false;
  Overrides rates_flags;
  rates->add_option("--config", rates_config, "Key-value run config file");
  add_spec_flags(rates, rates_flags);
  rates_flags.add(rates, "--p", "p", "Comma-separated probability levels");
  rates_flags.add(rates, "--n-grid", "n_grid", "Comma-separated sample sizes (each >= 16)");
  rates_flags.add(rates, "--n-min", "n_min", "Smallest n of a doubling grid");
  rates_flags.add(rates, "--n-max", "n_max", "Largest n of a doubling grid");
  rates_flags.add(rates, "--reps", "reps", "Replications per cell");
  rates_flags.add(rates, "--master-seed", "master_seed", "Master seed");
  rates_flags.add(rates, "--statistic", "statistic", "abs_remainder | oscillation_Dn | oscillation_En | sup_dev_En");
  rates_flags.add(rates, "--aggregate", "aggregate", "median | q90 | q99 | max");
  rates_flags.add(rates, "--envelope", "envelope", "thm21 | thm23 | thm24 | lemma33");
  rates_flags.add(rates, "--c0", "c0", "Scale of the D_n half-width");
  rates_flags.add(rates, "--theta", "theta", "Slack theta in 16 C_3 + theta");
  rates_flags.add(rates, "--delta", "delta", "Slack delta in 2 sqrt(C_3) + delta");
  rates_flags.add(rates, "--beta", "beta", "Block exponent beta");
  rates_flags.add(rates, "--sample-budget", "sample_budget", "Maximum sum(n_grid) * reps");
  rates->add_flag("--force", rates_force, "Run even if the sample budget is exceeded");
  rates->add_option("--csv", rates_csv, "Report table CSV output");
  rates->add_option("--json", rates_json, "Report table JSON output");
  rates->add_option("--fit-json", rates_fit, "Per-level rate fits as JSON (always summarized on stderr)");
  rates->add_option("--replications-csv", rates_reps_csv, "Per-replication dump");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Compare Monte-Carlo tail frequencies with the exponential inequality");
  std::string bounds_config, bounds_out, bounds_format = "csv", bounds_rounding = "floor", bounds_eps;
  std::size_t bounds_n = 1000, bounds_reps = 10000, bounds_points = 20;
  double bounds_beta = 0.25, bounds_level = 0.5;
  Overrides bounds_flags;
  bounds->add_option("--config", bounds_config, "Key-value process spec file");
  add_spec_flags(bounds, bounds_flags);
  bounds_flags.add(bounds, "--seed", "seed", "Master seed");
  bounds->add_option("-n,--n", bounds_n, "Sum length")->check(CLI::Range(2ul, 100'000'000ul));
  bounds->add_option("--beta", bounds_beta, "Block exponent beta in (0,1)");
  bounds->add_option("--reps", bounds_reps, "Monte-Carlo replications (>= 100)");
  bounds->add_option("--level", bounds_level, "Indicator threshold is the marginal's quantile at this level");
  bounds->add_option("--eps", bounds_eps, "Comma-separated epsilon grid (default: geometric)");
  bounds->add_option("--points", bounds_points, "Points in the default epsilon grid");
  bounds->add_option("--rounding", bounds_rounding, "Block length rounding of n^beta: floor | ceiling")
      ->check(CLI::IsMember({"floor", "ceiling"}));
  bounds->add_option("--format", bounds_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  bounds->add_option("-o,--out", bounds_out, "Output path (default stdout)");

  // var
  auto* var = app.add_subcommand("var", "Value-at-Risk as the sample p-quantile of log-returns");
  std::string var_input, var_mode = "prices", var_out;
  double var_p = 0.05;
  var->add_option("input", var_input, "CSV with one price or return per line")->required();
  var->add_option("--p", var_p, "Probability level");
  var->add_option("--mode", var_mode, "prices | returns")->check(CLI::IsMember({"prices", "returns"}));
  var->add_option("--json", var_out, "Write the result as JSON here");

  // report
  auto* report = app.add_subcommand("report", "Re-render a stored JSON report");
  std::string report_input, report_format = "csv", report_out;
  bool report_fit = false;
  report->add_option("input", report_input, "Report JSON written by `rates --json`")->required();
  report->add_option("--format", report_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  report->add_flag("--fit", report_fit, "Render per-level rate fits instead of the table");
  report->add_option("-o,--out", report_out, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const auto kv = load_config(sim_config, sim_flags);
      const auto spec = spec_from(kv);
      const auto seed = seed_of(kv, 1);
      const auto path = phiq::generate(spec, sim_n, seed);
      std::ostringstream text;
      phiq::write_path_csv(text, path);
      output(sim_out, text.str());
      if (!sim_diag.empty()) {
        const phiq::EmpiricalCdf ecdf(path.values);
        const double c3 = spec.mixing().c3();
        std::vector<phiq::DiagnosticsRow> rows;
        for (double p : phiq::parse_double_list(sim_p, "p")) {
          rows.push_back({path.spec_id, seed, phiq::diagnose(ecdf, spec.marginal(), p, c3)});
        }
        std::ostringstream d;
        phiq::write_diagnostics_csv(d, rows);
        phiq::write_file(sim_diag, d.str());
      }
      if (!sim_spec_out.empty()) {
        std::ostringstream s;
        phiq::write_process_spec(s, spec, seed);
        phiq::write_file(sim_spec_out, s.str());
      }
    } else if (*rates) {
      auto kv = load_config(rates_config, rates_flags);
      if (kv.count("generator") && kv["generator"] != "m_dependent" && !kv.count("marginal")) kv["marginal"] = "uniform";
      auto config = phiq::run_config_from(kv);
      config.allow_over_budget = rates_force;
      const auto result = phiq::run_experiment(config);
      if (!rates_csv.empty()) phiq::emit_report(result.table, phiq::ReportFormat::csv, rates_csv);
      if (!rates_json.empty()) phiq::emit_report(result.table, phiq::ReportFormat::json, rates_json);
      if (!rates_reps_csv.empty()) {
        std::ostringstream s;
        phiq::write_replications_csv(s, result.replications);
        phiq::write_file(rates_reps_csv, s.str());
      }
      if (rates_csv.empty() && rates_json.empty()) std::cout << phiq::render(result.table, phiq::ReportFormat::csv);
      std::vector<std::string> skipped;
      const auto fits = phiq::fit_levels(result.table, &skipped);
      for (const auto& f : fits) {
        std::cerr << "p=" << phiq::shortest(f.p) << " slope=" << phiq::sig17(f.fit.slope)
                  << " intercept=" << phiq::sig17(f.fit.intercept) << " r2=" << phiq::sig17(f.fit.r_squared) << '\n';
      }
      for (const auto& s : skipped) std::cerr << "no rate fit for " << s << '\n';
      if (!rates_fit.empty()) phiq::emit_report(fits, phiq::ReportFormat::json, rates_fit);
    } else if (*bounds) {
      const auto kv = load_config(bounds_config, bounds_flags);
      const auto spec = spec_from(kv);
      const auto transform = phiq::indicator_transform(spec.marginal(), spec.marginal().inv_cdf(bounds_level));
      const auto grid = bounds_eps.empty() ? phiq::default_eps_grid(bounds_n, transform, bounds_points)
                                           : phiq::parse_double_list(bounds_eps, "epsilon");
      const auto table = phiq::bound_vs_montecarlo(
          spec, transform, bounds_n, bounds_beta, grid, bounds_reps, seed_of(kv, 1), phiq::default_threads(),
          bounds_rounding == "floor" ? phiq::BlockRounding::floor : phiq::BlockRounding::ceiling);
      output(bounds_out, phiq::render(table, phiq::parse_format(bounds_format)));
      if (table.flagged() > 0) {
        std::cerr << table.flagged() << " epsilon value(s) where the Monte-Carlo lower bound exceeds the inequality\n";
        return 3;
      }
    } else if (*var) {
      std::ifstream in(var_input);
      if (!in) throw phiq::IoError("cannot open '" + var_input + "'");
      const auto series = phiq::read_series(in);
      const auto r = phiq::var_estimate(series, var_p,
                                        var_mode == "prices" ? phiq::SeriesMode::prices_given
                                                             : phiq::SeriesMode::returns_given);
      if (r.quantile_is_minimum) {
        std::cerr << "warning: n*p < 1, the estimate is the smallest return\n";
      }
      const nlohmann::json j = {{"p", var_p}, {"var", r.var}, {"n", r.n}, {"remainder_order", r.remainder_order}};
      if (var_out.empty()) {
        std::cout << "var=" << phiq::sig17(r.var) << " n=" << r.n << " remainder_order=" << phiq::sig17(r.remainder_order)
                  << '\n';
      } else {
        phiq::write_file(var_out, phiq::render(j));
      }
    } else if (*report) {
      const auto table = phiq::read_report_json(report_input);
      const auto format = phiq::parse_format(report_format);
      output(report_out, report_fit ? phiq::render(phiq::fit_levels(table), format) : phiq::render(table, format));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
