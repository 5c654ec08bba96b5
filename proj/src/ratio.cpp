#include "grec/ratio.hpp"

#include <charconv>
#include <numeric>

#include "grec/schema.hpp"

namespace grec {

namespace {

std::uint64_t parse_digits(std::string_view digits, std::string_view whole) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw UsageError("invalid ratio '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Ratio Ratio::parse(std::string_view text) {
  const std::string_view t = trim(text);
  if (t.empty()) throw UsageError("empty ratio");
  Ratio r;
  if (const auto slash = t.find('/'); slash != std::string_view::npos) {
    r.num = parse_digits(t.substr(0, slash), t);
    r.den = parse_digits(t.substr(slash + 1), t);
    if (r.den == 0) throw UsageError("ratio '" + std::string(t) + "' has a zero denominator");
  } else {
    const auto dot = t.find('.');
    const std::string_view whole = t.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : t.substr(dot + 1);
    if (frac.size() > 15) throw UsageError("ratio '" + std::string(t) + "' has too many decimals");
    r.den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) r.den *= 10;
    const std::uint64_t w = whole.empty() ? 0 : parse_digits(whole, t);
    const std::uint64_t f = frac.empty() ? 0 : parse_digits(frac, t);
    if (whole.empty() && frac.empty()) throw UsageError("invalid ratio '" + std::string(t) + "'");
    r.num = w * r.den + f;
  }
  const std::uint64_t g = std::gcd(r.num, r.den);
  if (g > 1) {
    r.num /= g;
    r.den /= g;
  }
  return r;
}

std::string Ratio::to_string() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

}  // namespace grec
