#include "csg/params.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "csg/error.hpp"

namespace csg {

Params Params::parse(std::string_view text) {
  Params p;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorCode::BadParams, "expected k=v, got '" + token + "'");
    p.values_[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return p;
}

const std::string* Params::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string Params::get_string(const std::string& key, std::optional<std::string> fallback) const {
  if (const auto* v = find(key)) return *v;
  if (fallback) return *fallback;
  fail(ErrorCode::BadParams, "missing parameter '" + key + "'");
}

double Params::get_double(const std::string& key, std::optional<double> fallback) const {
  const auto* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    fail(ErrorCode::BadParams, "missing parameter '" + key + "'");
  }
  if (v->find('/') != std::string::npos) return to_double(parse_rational(*v));
  double out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size())
    fail(ErrorCode::BadParams, "parameter '" + key + "' is not a number: '" + *v + "'");
  return out;
}

std::int64_t Params::get_int(const std::string& key, std::optional<std::int64_t> fallback) const {
  const auto* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    fail(ErrorCode::BadParams, "missing parameter '" + key + "'");
  }
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size())
    fail(ErrorCode::BadParams, "parameter '" + key + "' is not an integer: '" + *v + "'");
  return out;
}

Rational Params::get_rational(const std::string& key, std::optional<Rational> fallback) const {
  const auto* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    fail(ErrorCode::BadParams, "missing parameter '" + key + "'");
  }
  try {
    return parse_rational(*v);
  } catch (const Error& e) {
    fail(ErrorCode::BadParams, "parameter '" + key + "': " + e.what());
  }
}

bool Params::get_bool(const std::string& key, std::optional<bool> fallback) const {
  const auto* v = find(key);
  if (!v) {
    if (fallback) return *fallback;
    fail(ErrorCode::BadParams, "missing parameter '" + key + "'");
  }
  if (*v == "1" || *v == "true" || *v == "yes") return true;
  if (*v == "0" || *v == "false" || *v == "no") return false;
  fail(ErrorCode::BadParams, "parameter '" + key + "' is not a boolean: '" + *v + "'");
}

std::vector<Rational> Params::get_rational_list(const std::string& key) const {
  std::string text = get_string(key);
  std::vector<Rational> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(parse_rational(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void Params::require_only(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [k, v] : values_)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      fail(ErrorCode::BadParams, "unknown parameter '" + k + "'");
}

std::string Params::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (!out.empty()) out += ' ';
    out += k + "=" + v;
  }
  return out;
}

}  // namespace csg
