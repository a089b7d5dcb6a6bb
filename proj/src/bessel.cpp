#include "smmimo/bessel.hpp"

#include <cmath>

namespace smmimo {
namespace {

constexpr long double kPi = 3.14159265358979323846264338327950288L;

// Sum_k (-1)^k (x^2/4)^k / (k!)^2 in extended precision. The largest term is
// about exp(x)/x near k = x/2, so at the x = 12 switch point the cancellation
// leaves ~1e-14 absolute error in long double.
double j0_series(double x) {
  const long double q = static_cast<long double>(x) * x / 4.0L;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 80; ++k) {
    term *= -q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(static_cast<double>(term)) < 1e-22 && k > 4) break;
  }
  return static_cast<double>(sum);
}

// Hankel expansion: J0(x) ~ sqrt(2/(pi x)) [P(x) cos(x - pi/4) - Q(x) sin(x - pi/4)].
// The series is divergent; terms are accumulated only while they shrink, which
// bottoms out near 6e-12 at x = 12 and far below that for larger x.
double j0_asymptotic(double x) {
  const long double lx = x;
  long double p = 1.0L;
  long double q = 0.0L;
  long double a = 1.0L;  // a_k = prod (2m-1)^2 / (k! (8x)^k)
  long double prev = 1.0L;
  for (int k = 1; k <= 24; ++k) {
    const long double odd = 2.0L * k - 1.0L;
    a *= odd * odd / (8.0L * k * lx);
    if (a >= prev) break;
    prev = a;
    const int j = k / 2;
    if (k % 2 == 1) {
      q += ((j % 2 == 0) ? -a : a);
    } else {
      p += ((j % 2 == 1) ? -a : a);
    }
  }
  const long double chi = lx - kPi / 4.0L;
  const long double amp = std::sqrt(2.0L / (kPi * lx));
  return static_cast<double>(amp * (p * std::cos(chi) - q * std::sin(chi)));
}

}  // namespace

double bessel_j0(double x) {
  x = std::fabs(x);
  return x < 12.0 ? j0_series(x) : j0_asymptotic(x);
}

}  // namespace smmimo
