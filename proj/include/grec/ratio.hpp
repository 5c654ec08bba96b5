#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace grec {

/// Exact non-negative fraction num/den, used for alpha so that counts round without float drift.
struct Ratio {
  std::uint64_t num = 1;
  std::uint64_t den = 1;

  // Accepts decimal text such as "1", "0.35", ".5" or a fraction "7/20".
  static Ratio parse(std::string_view text);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;

  bool operator==(const Ratio&) const = default;
};

}  // namespace grec
