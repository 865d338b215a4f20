#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>

namespace csg {

/// Structured state identifier: a short tuple of integers, totally ordered
/// lexicographically (a proper prefix sorts first). Transformations build new
/// ids by prefixing a tag or appending a coordinate, so nested constructions
/// stay collision-free without a global registry.
class StateId {
 public:
  static constexpr std::size_t kMaxCoords = 8;

  StateId() = default;
  StateId(std::initializer_list<std::int64_t> coords);
  explicit StateId(std::span<const std::int64_t> coords);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  std::int64_t operator[](std::size_t i) const noexcept { return coords_[i]; }
  std::span<const std::int64_t> coords() const noexcept { return {coords_.data(), size_}; }

  StateId appended(std::int64_t value) const;
  StateId prefixed(std::int64_t tag) const;
  /// Coordinates [from, size()).
  StateId suffix(std::size_t from) const;
  /// Coordinates [0, count).
  StateId prefix(std::size_t count) const;

  friend bool operator==(const StateId& a, const StateId& b) noexcept;
  friend std::strong_ordering operator<=>(const StateId& a, const StateId& b) noexcept;

  /// Canonical text form "[c0,c1,...]".
  std::string to_string() const;
  static StateId parse(std::string_view text);

  std::size_t hash() const noexcept;

 private:
  std::array<std::int64_t, kMaxCoords> coords_{};
  std::uint8_t size_ = 0;
};

struct StateIdHash {
  std::size_t operator()(const StateId& s) const noexcept { return s.hash(); }
};

}  // namespace csg

template <>
struct std::hash<csg::StateId> {
  std::size_t operator()(const csg::StateId& s) const noexcept { return s.hash(); }
};
