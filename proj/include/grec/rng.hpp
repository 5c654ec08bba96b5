#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace grec {

// Seeded generator whose derived draws are identical across standard libraries.
// std::mt19937_64 is fully specified; the distribution helpers below avoid the
// implementation-defined std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, bound); bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);
  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();
  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed from a base seed and a stream label.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace grec
