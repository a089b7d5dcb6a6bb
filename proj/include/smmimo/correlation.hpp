#pragma once

#include <Eigen/Dense>

namespace smmimo {

/// Transmit-side correlation of a uniformly spaced linear array under Jakes'
/// model, plus the two derived quantities the rate expressions consume:
/// eps_s (sum of squared correlations with the first antenna) and the
/// diagonal of the inverse correlation matrix.
struct TxCorrelation {
  int antenna_count = 1;
  double spacing_mm = 0.0;
  double wavelength_mm = 0.0;
  Eigen::MatrixXd r_t;      // N x N, Toeplitz, unit diagonal
  double eps_s = 0.0;
  Eigen::VectorXd r_diag;   // diag(R_t^{-1})

  double r_diag_sum() const { return r_diag.sum(); }
};

/// Builds R_t(i, j) = J0(2 pi d_s |i - j| / lambda) and its derived scalars.
/// Throws NumericalError if the matrix is not numerically positive definite
/// (smallest eigenvalue <= 1e-10), which happens for near-zero spacing.
TxCorrelation jakes_matrix(int antenna_count, double spacing_mm, double wavelength_mm);

/// Objective of the spacing search: sum over n >= 2 of J0(2 pi d (n-1) / lambda)^2.
/// Equals eps_s of the corresponding Jakes matrix.
double spacing_objective(int antenna_count, double spacing_mm, double wavelength_mm);

struct SpacingResult {
  double spacing_mm = 0.0;
  double eps_s = 0.0;
};

/// Grid scan over (0, D_m/(N-1)] minimizing the correlation objective, with a
/// golden-section polish of every grid valley. When several spacings reach the
/// objective floor (every Bessel zero inside the interval does), the smallest
/// one is returned.
SpacingResult optimize_spacing(int antenna_count, double device_size_mm, double wavelength_mm,
                               int grid_points = 10000);

enum class SpacingPolicy { MaxSpread, Optimized };

/// Correlation for a device of size D_m: spacing D_m/(N-1) under MaxSpread,
/// or the grid-searched optimum. N = 1 yields the trivial scalar correlation.
TxCorrelation correlation_for_device(int antenna_count, double device_size_mm,
                                     double wavelength_mm, SpacingPolicy policy,
                                     int grid_points = 10000);

}  // namespace smmimo
