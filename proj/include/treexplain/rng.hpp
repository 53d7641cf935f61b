#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace treexplain {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Every random stream in the library is seeded through
// derive_seed so that nearby user seeds give unrelated streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Well-known stream tags.
enum class Stream : std::uint64_t {
  Split = 1,
  Folds = 2,
  Bootstrap = 3,
  Features = 4,
  Thresholds = 5,
  Tree = 6,
};

// Mixes a base seed with a stream tag and an index (tree number, repetition).
constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                    std::uint64_t index = 0) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ (index * 0xD1B54A32D192ED03ULL));
}

// Uniform double in [0, 1) from the top 53 bits.
double uniform_unit(Rng& rng);

// Uniform integer in [0, bound) by rejection; bound > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

// Fisher-Yates shuffle on top of uniform_below, so orderings do not depend on
// the standard library's distribution implementations.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = uniform_below(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace treexplain
