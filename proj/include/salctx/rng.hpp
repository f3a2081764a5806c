#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace salctx {

// Deterministic generator. Bounded draws are implemented here rather than via
// std::uniform_int_distribution, whose output differs across standard
// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream for (seed, key), e.g. (run seed, example id).
  static Rng keyed(std::uint64_t seed, std::uint64_t key);

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace salctx
