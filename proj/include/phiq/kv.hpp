#ifndef PHIQ_KV_HPP
#define PHIQ_KV_HPP

#include <istream>
#include <map>
#include <string>

#include "phiq/errors.hpp"

namespace phiq {

using KeyValues = std::map<std::string, std::string>;

/// Reads `key = value` lines. Blank lines and lines starting with '#' or ';'
/// are skipped; a `[section]` line is ignored so INI-style files also load.
inline KeyValues read_key_values(std::istream& in) {
  auto trim = [](std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string{};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };
  KeyValues out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("line " + std::to_string(lineno) + ": expected key = value");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) throw DataError("line " + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

}  // namespace phiq

#endif  // PHIQ_KV_HPP
