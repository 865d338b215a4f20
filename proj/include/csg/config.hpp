#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "csg/rational.hpp"

namespace csg {

/// Experiment configuration, one "key = value" per line:
///
///   experiment = exp_badmatch_value      # mandatory
///   seed = 12345                         # mandatory
///   [solver]                             # keys below become solver.<key>
///   inner_cap = 10000
///   [output.files]                       # nested: output.files.<key>
///
/// '#' or ';' starts a comment. Keys and section names use [A-Za-z0-9_.].
/// Violations fail with ConfigInvalid naming the line.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  const std::string& experiment() const { return experiment_; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed);
  const std::string& origin() const { return origin_; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::string value);
  std::string get_string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  std::int64_t get_int(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) const;
  double get_double(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  Rational get_rational(const std::string& key, std::optional<Rational> fallback = std::nullopt) const;
  bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt) const;
  std::vector<Rational> get_rational_list(const std::string& key, std::optional<std::vector<Rational>> fallback =
                                                                      std::nullopt) const;

  /// ConfigInvalid for any key outside `allowed` (experiment and seed are
  /// always allowed).
  void require_only(const std::set<std::string>& allowed) const;

  /// Every key with its value, "experiment" and "seed" included.
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::string origin_;
  std::string experiment_;
  std::uint64_t seed_ = 0;
  std::map<std::string, std::string> values_;
};

}  // namespace csg
