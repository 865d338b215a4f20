#include "csg/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "csg/error.hpp"

namespace csg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.' || k.find("..") != std::string::npos) return false;
  return std::all_of(k.begin(), k.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; });
}

[[noreturn]] void invalid(const std::string& origin, std::size_t line, const std::string& msg) {
  fail(ErrorCode::ConfigInvalid, origin + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::istringstream in(text);
  std::string raw, section;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto cut = raw.find_first_of("#;"); cut != std::string::npos) raw.resize(cut);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') invalid(origin, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_key(section)) invalid(origin, line, "bad section name '" + section + "'");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) invalid(origin, line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!valid_key(key)) invalid(origin, line, "bad key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (c.values_.count(full)) invalid(origin, line, "duplicate key '" + full + "'");
    c.values_[full] = value;
  }
  if (!c.has("experiment") || c.values_["experiment"].empty())
    fail(ErrorCode::ConfigInvalid, origin + ": missing top-level 'experiment'");
  if (!c.has("seed")) fail(ErrorCode::ConfigInvalid, origin + ": missing top-level 'seed'");
  c.experiment_ = c.values_["experiment"];
  const std::string& seed = c.values_["seed"];
  try {
    std::size_t used = 0;
    c.seed_ = std::stoull(seed, &used);
    if (used != seed.size() || seed.front() == '-') throw std::invalid_argument(seed);
  } catch (const std::exception&) {
    fail(ErrorCode::ConfigInvalid, origin + ": seed must be a nonnegative integer, got '" + seed + "'");
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str(), path);
}

void Config::set_seed(std::uint64_t seed) {
  seed_ = seed;
  values_["seed"] = std::to_string(seed);
}

void Config::set(const std::string& key, std::string value) {
  if (!valid_key(key)) fail(ErrorCode::ConfigInvalid, "bad key '" + key + "'");
  values_[key] = std::move(value);
}

namespace {

template <class T, class F>
T read_value(const std::map<std::string, std::string>& values, const std::string& key, std::optional<T> fallback,
             const char* what, F convert) {
  auto it = values.find(key);
  if (it == values.end()) {
    if (fallback) return *fallback;
    fail(ErrorCode::ConfigInvalid, "missing key '" + key + "'");
  }
  try {
    return convert(it->second);
  } catch (const std::exception&) {
    fail(ErrorCode::ConfigInvalid, "key '" + key + "' must be " + what + ", got '" + it->second + "'");
  }
}

}  // namespace

std::string Config::get_string(const std::string& key, std::optional<std::string> fallback) const {
  return read_value<std::string>(values_, key, std::move(fallback), "a string", [](const std::string& v) { return v; });
}

std::int64_t Config::get_int(const std::string& key, std::optional<std::int64_t> fallback) const {
  return read_value<std::int64_t>(values_, key, fallback, "an integer", [](const std::string& v) {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::int64_t>(x);
  });
}

double Config::get_double(const std::string& key, std::optional<double> fallback) const {
  return read_value<double>(values_, key, fallback, "a number", [](const std::string& v) {
    if (v.find('/') != std::string::npos) return parse_rational(v).get_d();
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  });
}

Rational Config::get_rational(const std::string& key, std::optional<Rational> fallback) const {
  return read_value<Rational>(values_, key, std::move(fallback), "a decimal or fraction",
                              [](const std::string& v) { return parse_rational(v); });
}

bool Config::get_bool(const std::string& key, std::optional<bool> fallback) const {
  return read_value<bool>(values_, key, fallback, "true or false", [](const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument(v);
  });
}

std::vector<Rational> Config::get_rational_list(const std::string& key,
                                                std::optional<std::vector<Rational>> fallback) const {
  return read_value<std::vector<Rational>>(values_, key, std::move(fallback), "a comma separated list",
                                           [](const std::string& v) {
                                             std::vector<Rational> out;
                                             std::stringstream ss(v);
                                             for (std::string item; std::getline(ss, item, ',');)
                                               out.push_back(parse_rational(trim(item)));
                                             if (out.empty()) throw std::invalid_argument(v);
                                             return out;
                                           });
}

void Config::require_only(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : values_) {
    if (k == "experiment" || k == "seed" || allowed.count(k)) continue;
    fail(ErrorCode::ConfigInvalid, origin_ + ": unknown key '" + k + "' for " + experiment_);
  }
}

}  // namespace csg
