#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace macfcs::rng {

// Deterministic generator used everywhere randomness is needed: splitmix64.
// Streams are derived by hashing a base seed with a purpose tag and any
// number of indices, so independent consumers (restarts, trials, codebook
// cells) get independent streams and results do not depend on scheduling.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a 64
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::uint64_t derive(std::uint64_t key, std::uint64_t v) {
  return mix(key ^ (v * 0xD6E8FEB86659FD93ull));
}

template <typename... Idx>
std::uint64_t stream_key(std::uint64_t seed, std::string_view tag, Idx... idx) {
  std::uint64_t k = mix(seed ^ hash_tag(tag));
  ((k = derive(k, static_cast<std::uint64_t>(idx))), ...);
  return k;
}

class Stream {
 public:
  explicit Stream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return n <= 1 ? 0 : next_u64() % n; }

  // Sample an index from a pmf by CDF inversion; always returns < pmf.size().
  std::size_t sample(std::span<const double> pmf) {
    double u = next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pmf.size(); ++i) {
      acc += pmf[i];
      if (u < acc) return i;
    }
    return pmf.empty() ? 0 : pmf.size() - 1;
  }

 private:
  std::uint64_t state_;
};

// Stateless uniform bin assignment: the bin of item `index` under bin map `key`.
inline std::uint64_t bin_of(std::uint64_t key, std::uint64_t index, std::uint64_t bins) {
  return bins <= 1 ? 0 : derive(key, index) % bins;
}

}  // namespace macfcs::rng
