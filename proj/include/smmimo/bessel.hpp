#pragma once

namespace smmimo {

/// Bessel function of the first kind, order zero.
/// Ascending power series below x = 12, Hankel asymptotic expansion beyond;
/// absolute accuracy better than 1e-10 on [0, 50].
double bessel_j0(double x);

}  // namespace smmimo
