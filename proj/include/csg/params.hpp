#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csg/rational.hpp"

namespace csg {

/// Named string parameters ("k=v") handed to constructors and transforms.
class Params {
 public:
  Params() = default;
  explicit Params(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  /// Parses whitespace separated "k=v" tokens.
  static Params parse(std::string_view text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::string get_string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  double get_double(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  std::int64_t get_int(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) const;
  Rational get_rational(const std::string& key, std::optional<Rational> fallback = std::nullopt) const;
  bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  /// Comma separated list of decimals or fractions.
  std::vector<Rational> get_rational_list(const std::string& key) const;

  /// Fails with BadParams when a key outside `allowed` is present.
  void require_only(std::initializer_list<std::string_view> allowed) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// "k1=v1 k2=v2" in key order.
  std::string to_string() const;

 private:
  const std::string* find(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace csg
