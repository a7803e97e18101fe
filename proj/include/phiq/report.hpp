#ifndef PHIQ_REPORT_HPP
#define PHIQ_REPORT_HPP

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phiq/bahadur.hpp"
#include "phiq/bounds.hpp"
#include "phiq/errors.hpp"
#include "phiq/experiment.hpp"
#include "phiq/format.hpp"
#include "phiq/rate_fit.hpp"

// Writers here are bit-stable: JSON objects are emitted with sorted keys and
// CSV numbers with 17 significant digits.

namespace phiq {

enum class ReportFormat { csv, json };

inline ReportFormat parse_format(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw ArgumentError("unknown report format '" + std::string(s) + "'");
}

inline void write_csv(std::ostream& out, const ReportTable& table) {
  out << "n,p,statistic,envelope,violation_fraction,reps\n";
  for (const auto& r : table.rows) {
    out << r.n << ',' << sig17(r.p) << ',' << sig17(r.statistic) << ',' << sig17(r.envelope) << ','
        << sig17(r.violation_fraction) << ',' << r.reps << '\n';
  }
}

inline nlohmann::json to_json(const ReportTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"n", r.n},
                    {"p", r.p},
                    {"statistic", r.statistic},
                    {"envelope", r.envelope},
                    {"violation_fraction", r.violation_fraction},
                    {"reps", r.reps}});
  }
  const auto& m = table.metadata;
  return {{"metadata",
           {{"config_hash", m.config_hash},
            {"master_seed", m.master_seed},
            {"version", m.version},
            {"spec_id", m.spec_id},
            {"statistic", m.statistic},
            {"aggregate", m.aggregate},
            {"envelope", m.envelope}}},
          {"rows", rows}};
}

inline ReportTable report_from_json(const nlohmann::json& j) {
  try {
    ReportTable t;
    const auto& m = j.at("metadata");
    t.metadata.config_hash = m.at("config_hash").get<std::string>();
    t.metadata.master_seed = m.at("master_seed").get<std::uint64_t>();
    t.metadata.version = m.at("version").get<std::string>();
    t.metadata.spec_id = m.at("spec_id").get<std::string>();
    t.metadata.statistic = m.at("statistic").get<std::string>();
    t.metadata.aggregate = m.at("aggregate").get<std::string>();
    t.metadata.envelope = m.at("envelope").get<std::string>();
    for (const auto& r : j.at("rows")) {
      t.rows.push_back({r.at("n").get<std::size_t>(), r.at("p").get<double>(), r.at("statistic").get<double>(),
                        r.at("envelope").get<double>(), r.at("violation_fraction").get<double>(),
                        r.at("reps").get<std::size_t>()});
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report JSON: ") + e.what());
  }
}

inline nlohmann::json to_json(const RateFit& fit) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& [n, y] : fit.points) points.push_back({{"n", n}, {"statistic", y}});
  return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}, {"points", points}};
}

inline void write_csv(std::ostream& out, const RateFit& fit) {
  out << "slope,intercept,r_squared\n"
      << sig17(fit.slope) << ',' << sig17(fit.intercept) << ',' << sig17(fit.r_squared) << '\n';
}

inline nlohmann::json to_json(const std::vector<LevelFit>& fits) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& f : fits) {
    auto j = to_json(f.fit);
    j["p"] = f.p;
    out.push_back(std::move(j));
  }
  return out;
}

inline void write_csv(std::ostream& out, const std::vector<LevelFit>& fits) {
  out << "p,slope,intercept,r_squared\n";
  for (const auto& f : fits) {
    out << sig17(f.p) << ',' << sig17(f.fit.slope) << ',' << sig17(f.fit.intercept) << ','
        << sig17(f.fit.r_squared) << '\n';
  }
}

inline nlohmann::json to_json(const BoundTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"epsilon", r.epsilon},
                    {"mc_tail", r.mc_tail},
                    {"mc_ci_halfwidth", r.mc_ci_halfwidth},
                    {"mc_ci_lower", r.mc_ci_lower},
                    {"bound", r.bound},
                    {"flag", r.flag}});
  }
  return {{"spec_id", table.spec_id}, {"n", table.n},       {"beta", table.beta},
          {"reps", table.reps},       {"seed", table.seed}, {"rows", rows}};
}

inline void write_csv(std::ostream& out, const BoundTable& table) { write_bound_csv(out, table); }

/// Per-replication dump: n,p,rep,seed,value,envelope,violated
inline void write_replications_csv(std::ostream& out, const std::vector<ReplicationRecord>& records) {
  out << "n,p,rep,seed,value,envelope,violated\n";
  for (const auto& r : records) {
    out << r.n << ',' << sig17(r.p) << ',' << r.rep << ',' << r.seed << ',' << sig17(r.value) << ','
        << sig17(r.envelope) << ',' << (r.violated ? 1 : 0) << '\n';
  }
}

inline std::vector<ReplicationRecord> read_replications_csv(std::istream& in) {
  std::vector<ReplicationRecord> out;
  std::string line;
  std::getline(in, line);
  if (line.rfind("n,p,rep,seed,value,envelope,violated", 0) != 0) throw DataError("unexpected replication CSV header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw DataError("replication CSV row has " + std::to_string(cells.size()) + " cells");
    ReplicationRecord r;
    r.n = parse_u64(cells[0], "n");
    r.p = parse_double(cells[1], "p");
    r.rep = parse_u64(cells[2], "rep");
    r.seed = parse_u64(cells[3], "seed");
    r.value = parse_double(cells[4], "value");
    r.envelope = parse_double(cells[5], "envelope");
    r.violated = cells[6] == "1";
    out.push_back(r);
  }
  return out;
}

inline std::string render(const nlohmann::json& j) { return j.dump(2) + "\n"; }

template <class T>
std::string render(const T& item, ReportFormat format) {
  if (format == ReportFormat::json) return render(to_json(item));
  std::ostringstream out;
  write_csv(out, item);
  return out.str();
}

/// Writes `text` to `path`, surfacing failures with the path in the message.
inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  out << text;
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading: " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class T>
void emit_report(const T& item, ReportFormat format, const std::filesystem::path& path) {
  write_file(path, render(item, format));
}

inline ReportTable read_report_json(const std::filesystem::path& path) {
  try {
    return report_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace phiq

#endif  // PHIQ_REPORT_HPP
