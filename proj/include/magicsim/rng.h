#pragma once

#include <cstdint>

namespace magicsim {

/*
 * Random streams.
 *
 * Every stochastic draw comes from a SplitMix64 stream (Steele, Lea & Flood,
 * "Fast splittable pseudorandom number generators", 2014). Streams are keyed:
 * derive_seed(parent, key) hashes a parent seed and a key through the
 * SplitMix64 finalizer, so the stream for (trial, unit) or (trial, node) does
 * not depend on how many other streams exist or in which order they are used.
 * Uniform doubles take the top 53 bits of each output. No std:: distribution
 * is used, so traces are identical across compilers and platforms.
 */

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key) {
  return splitmix64_finalize(parent ^ splitmix64_finalize(key + kGoldenGamma));
}

// Stream labels used with derive_seed.
enum class StreamKey : std::uint64_t {
  production = 0x70726f64,  // "prod"
  injection = 0x696e6a63,   // "injc"
};

constexpr std::uint64_t derive_seed(std::uint64_t parent, StreamKey key) {
  return derive_seed(parent, static_cast<std::uint64_t>(key));
}

class RandomStream {
 public:
  constexpr explicit RandomStream(std::uint64_t seed = 0) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += kGoldenGamma;
    return splitmix64_finalize(state_);
  }

  // Uniform in [0, 1).
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  constexpr bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace magicsim
