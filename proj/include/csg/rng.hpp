#pragma once

#include <cstdint>

namespace csg {

/// Counter-based random stream: draw number k of stream j under seed s is a
/// pure function of (s, j, k). Streams are independent values that the caller
/// owns; nothing is shared between simulations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

  /// Uniform in [0,1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t next_u64() noexcept { return value_at(seed_, stream_, draw_++); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t draws() const noexcept { return draw_; }

  /// SplitMix64 finalizer over a mixed (seed, stream, draw) key.
  static std::uint64_t value_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t draw) noexcept {
    std::uint64_t z = mix(seed ^ 0x9e3779b97f4a7c15ULL);
    z = mix(z ^ (stream + 0x632be59bd9b4e019ULL));
    z = mix(z ^ (draw * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
    return z;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t draw_ = 0;
};

}  // namespace csg
