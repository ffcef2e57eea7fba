#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dagsim/domain.hpp"
#include "dagsim/error.hpp"

namespace dagsim {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size())
    throw Error(Errc::InvalidArgument, "malformed number '" + s + "' for " + std::string(what));
  return value;
}

inline std::uint64_t parse_unsigned(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    if (!s.empty() && s[0] != '-') value = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size())
    throw Error(Errc::InvalidArgument, "malformed integer '" + s + "' for " + std::string(what));
  return value;
}

// "exp:<mean>" | "fixed:<fee>"
inline FeeModel parse_fee_model(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() == 2 && (parts[0] == "exp" || parts[0] == "exponential"))
    return FeeModel::exponential(parse_double(parts[1], "fee"));
  if (parts.size() == 2 && parts[0] == "fixed") return FeeModel::fixed(parse_double(parts[1], "fee"));
  throw Error(Errc::InvalidArgument, "malformed fee model '" + std::string(text) + "' (expected exp:<mean> or fixed:<fee>)");
}

inline std::string to_string(const FeeModel& fee) {
  std::ostringstream out;
  out << (fee.kind == FeeModel::Kind::Fixed ? "fixed:" : "exp:") << fee.value;
  return out.str();
}

// "<seconds>" | "<lo>:<hi>"
inline InjectionPeriod parse_injection(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() == 1) return InjectionPeriod::fixed(parse_double(parts[0], "injection"));
  if (parts.size() == 2)
    return InjectionPeriod::uniform(parse_double(parts[0], "injection"), parse_double(parts[1], "injection"));
  throw Error(Errc::InvalidArgument, "malformed injection period '" + std::string(text) + "'");
}

/// Key/value overrides from the command line or a config file. Every lookup
/// marks its key as used so leftovers can be reported as errors.
class Params {
 public:
  Params() = default;
  explicit Params(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  // Parses "key=value".
  void set_assignment(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw Error(Errc::InvalidArgument, "parameter '" + std::string(assignment) + "' is not key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(it->second, key);
  }

  std::uint64_t get_unsigned(const std::string& key, std::uint64_t fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_unsigned(it->second, key);
  }

  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split(it->second, ',')) out.push_back(parse_double(item, key));
    return out;
  }

  std::vector<std::uint64_t> get_unsigneds(const std::string& key, std::vector<std::uint64_t> fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::uint64_t> out;
    for (const auto& item : split(it->second, ',')) out.push_back(parse_unsigned(item, key));
    return out;
  }

  std::vector<std::string> get_strings(const std::string& key, std::vector<std::string> fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : split(it->second, ',');
  }

  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_)
      if (!used_.count(key)) out.push_back(key);
    return out;
  }

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace dagsim
