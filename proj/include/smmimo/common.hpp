#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace smmimo {

inline constexpr const char* kVersion = "0.1.0";

enum class Combiner { MR, ZF };

inline const char* to_string(Combiner c) { return c == Combiner::MR ? "mr" : "zf"; }

/// User-facing configuration problem (bad key, unsupported value, violated precondition).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter combination that cannot be evaluated (pilot overhead >= frame, M <= NK for ZF).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown (degenerate correlation matrix, non-finite combiner, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pairwise (cascade) summation. Keeps the reduction order independent of how
// the work was sharded across threads, so seeded runs reproduce bit-identically.
template <typename T>
T pairwise_sum(const T* data, std::size_t n) {
  if (n <= 32) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

/// Compensated accumulator for alternating sums with heavy cancellation.
class KahanAccumulator {
 public:
  void add(long double x) {
    const long double y = x - carry_;
    const long double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  long double value() const { return sum_; }

 private:
  long double sum_ = 0.0L;
  long double carry_ = 0.0L;
};

// Exact for n <= 62 (result and intermediates stay below 2^63).
inline std::uint64_t binomial_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return c;
}

}  // namespace smmimo
