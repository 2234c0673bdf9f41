#pragma once

#include <cstdint>

namespace feedloop {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Steele et al. / Vigna). Used both as the seed mixer
// and as the output function of the generator below.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Identifies one replicate of a seeded experiment. The replicate seed is a
// pure function of (base_seed, replicate_index), so replicates can be run in
// any order or in parallel.
struct SeedSpec {
  std::uint64_t base_seed = 0;
  std::uint64_t replicate_index = 0;

  std::uint64_t value() const {
    return mix64(base_seed + replicate_index * kGoldenGamma);
  }
};

// Derives an independent stream seed from a parent seed and a stream tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag + kGoldenGamma));
}

// SplitMix64: counter-based, 64-bit state, portable across platforms.
// This is the only RNG used anywhere in the library; all sampling is
// inverse-CDF on top of next_double().
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace feedloop
