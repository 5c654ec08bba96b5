#pragma once

#include <cstdint>
#include <vector>

#include "grec/encoder.hpp"
#include "grec/ratio.hpp"

namespace grec {

struct SamplingConfig {
  Ratio alpha;  // in [0, 1]
  std::uint64_t seed = 0;
};

/// floor(alpha * n + 1/2), computed exactly.
std::size_t round_half_up(const Ratio& alpha, std::size_t n);

/// Keeps every positive pair and a uniform random subset of round_half_up(alpha * N_neg)
/// negatives, preserving input order. For a fixed seed the kept negatives grow as a
/// nested family in alpha.
std::vector<EncodedPair> sample_negatives(const std::vector<EncodedPair>& pairs, const SamplingConfig& config);

}  // namespace grec
