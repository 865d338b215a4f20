#include "csg/state_id.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <vector>

#include "csg/error.hpp"

namespace csg {

StateId::StateId(std::initializer_list<std::int64_t> coords) : StateId(std::span<const std::int64_t>(coords.begin(), coords.size())) {}

StateId::StateId(std::span<const std::int64_t> coords) {
  if (coords.size() > kMaxCoords) fail(ErrorCode::BadParams, "state id nesting too deep");
  std::copy(coords.begin(), coords.end(), coords_.begin());
  size_ = static_cast<std::uint8_t>(coords.size());
}

StateId StateId::appended(std::int64_t value) const {
  if (size_ == kMaxCoords) fail(ErrorCode::BadParams, "state id nesting too deep");
  StateId r = *this;
  r.coords_[r.size_++] = value;
  return r;
}

StateId StateId::prefixed(std::int64_t tag) const {
  if (size_ == kMaxCoords) fail(ErrorCode::BadParams, "state id nesting too deep");
  StateId r;
  r.coords_[0] = tag;
  std::copy(coords_.begin(), coords_.begin() + size_, r.coords_.begin() + 1);
  r.size_ = static_cast<std::uint8_t>(size_ + 1);
  return r;
}

StateId StateId::suffix(std::size_t from) const {
  if (from > size_) from = size_;
  return StateId(std::span<const std::int64_t>(coords_.data() + from, size_ - from));
}

StateId StateId::prefix(std::size_t count) const {
  if (count > size_) count = size_;
  return StateId(std::span<const std::int64_t>(coords_.data(), count));
}

bool operator==(const StateId& a, const StateId& b) noexcept {
  return a.size_ == b.size_ && std::equal(a.coords_.begin(), a.coords_.begin() + a.size_, b.coords_.begin());
}

std::strong_ordering operator<=>(const StateId& a, const StateId& b) noexcept {
  return std::lexicographical_compare_three_way(a.coords_.begin(), a.coords_.begin() + a.size_, b.coords_.begin(),
                                                b.coords_.begin() + b.size_);
}

std::string StateId::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < size_; ++i) {
    if (i) out += ',';
    out += std::to_string(coords_[i]);
  }
  out += ']';
  return out;
}

StateId StateId::parse(std::string_view text) {
  if (text.size() < 2 || text.front() != '[' || text.back() != ']')
    fail(ErrorCode::ParseError, "state id must look like [c0,c1,...]: '" + std::string(text) + "'");
  std::string_view body = text.substr(1, text.size() - 2);
  std::vector<std::int64_t> coords;
  while (!body.empty()) {
    auto comma = body.find(',');
    std::string_view item = body.substr(0, comma);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size())
      fail(ErrorCode::ParseError, "bad coordinate in '" + std::string(text) + "'");
    coords.push_back(v);
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return StateId(std::span<const std::int64_t>(coords.data(), coords.size()));
}

std::size_t StateId::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ size_;
  for (std::size_t i = 0; i < size_; ++i) {
    h ^= static_cast<std::uint64_t>(coords_[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace csg
