#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace onset {

// SplitMix64 finalizer (Steele, Lea & Flood). Used to derive independent
// sub-seeds: derive_seed(seed, stream) = splitmix64(seed + (stream + 1) * 0x9E3779B97F4A7C15).
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Portable pseudorandom source. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; the distributions below are
// implemented here rather than taken from <random> because the standard
// library distributions are implementation-defined.
//
//   uniform01()        (next() >> 11) * 2^-53, in [0, 1)
//   uniform_index(n)   rejection sampling on next() % n, unbiased, in [0, n)
//   normal()           Box-Muller on two uniform01() draws, cosine branch
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform01();
  std::size_t uniform_index(std::size_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace onset
