#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace htlab {

inline double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// C(n, k). Multiplicative form below stays integer-valued at every step, so
// results are exact in a double as long as they fit in 53 bits; larger
// arguments fall back to log-gamma.
inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  if (n > 300) return std::exp(log_binomial(n, k));
  double result = 1.0;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (result > 9.0e15) return std::exp(log_binomial(n, k));
  }
  return std::round(result);
}

// C(an, ak) / C(bn, bk), stable for arguments too large to form directly.
inline double binomial_ratio(int an, int ak, int bn, int bk) {
  if (ak < 0 || ak > an) return 0.0;
  const double num = binomial(an, ak);
  const double den = binomial(bn, bk);
  if (std::isfinite(num) && std::isfinite(den) && den > 0.0 && num < 9.0e15 &&
      den < 9.0e15) {
    return num / den;
  }
  return std::exp(log_binomial(an, ak) - log_binomial(bn, bk));
}

// Shortest round-trip decimal form; keeps report files byte-stable.
inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s) {
  return fnv1a(s.data(), s.size());
}

}  // namespace htlab
