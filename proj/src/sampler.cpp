#include "grec/sampler.hpp"

#include "grec/rng.hpp"
#include "grec/schema.hpp"

namespace grec {

std::size_t round_half_up(const Ratio& alpha, std::size_t n) {
  const unsigned __int128 scaled = static_cast<unsigned __int128>(alpha.num) * n * 2 + alpha.den;
  return static_cast<std::size_t>(scaled / (static_cast<unsigned __int128>(alpha.den) * 2));
}

std::vector<EncodedPair> sample_negatives(const std::vector<EncodedPair>& pairs, const SamplingConfig& config) {
  if (config.alpha.num > config.alpha.den) {
    throw UsageError("alpha " + config.alpha.to_string() + " outside [0, 1]");
  }
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].is_positive) negatives.push_back(i);
  }
  const std::size_t keep = round_half_up(config.alpha, negatives.size());

  // Partial Fisher-Yates: the first `keep` slots form the sample.
  Rng rng(config.seed);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + rng.uniform_index(negatives.size() - i);
    std::swap(negatives[i], negatives[j]);
  }
  std::vector<bool> kept(pairs.size(), false);
  for (std::size_t i = 0; i < keep; ++i) kept[negatives[i]] = true;

  std::vector<EncodedPair> out;
  out.reserve(pairs.size() - negatives.size() + keep);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].is_positive || kept[i]) out.push_back(pairs[i]);
  }
  return out;
}

}  // namespace grec
