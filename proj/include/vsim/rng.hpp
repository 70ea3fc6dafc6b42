#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace vsim {

// SplitMix64 (Steele, Lea & Flood 2014). Chosen because it is a few lines of
// integer arithmetic with identical output on every platform and language.
// Bounded draws use rejection sampling on the top of the range so they do not
// depend on std::uniform_int_distribution (implementation-defined).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  int range(int lo, int hi_inclusive) {
    if (hi_inclusive <= lo) return lo;
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi_inclusive - lo) + 1));
  }

  bool coin() { return (next() >> 63) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<std::size_t>(below(items.size()))];
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Derives an independent stream from a base seed and a small salt (retry
// counter, episode tick, ...). One SplitMix64 step over the xor.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  SplitMix64 g(seed ^ (salt * 0xD1B54A32D192ED03ULL));
  return g.next();
}

// FNV-1a 64 over bytes; used for observation digests.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace vsim
