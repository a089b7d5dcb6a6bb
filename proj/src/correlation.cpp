#include "smmimo/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "smmimo/bessel.hpp"
#include "smmimo/common.hpp"

namespace smmimo {

TxCorrelation jakes_matrix(int antenna_count, double spacing_mm, double wavelength_mm) {
  if (antenna_count < 1) throw ConfigError("antenna count must be at least 1");
  if (!(spacing_mm > 0.0)) throw ConfigError("antenna spacing must be positive");
  if (!(wavelength_mm > 0.0)) throw ConfigError("wavelength must be positive");

  TxCorrelation corr;
  corr.antenna_count = antenna_count;
  corr.spacing_mm = spacing_mm;
  corr.wavelength_mm = wavelength_mm;

  const int n = antenna_count;
  corr.r_t.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      corr.r_t(i, j) = bessel_j0(2.0 * M_PI * spacing_mm * std::abs(i - j) / wavelength_mm);
    }
  }

  corr.eps_s = 0.0;
  for (int m = 1; m < n; ++m) corr.eps_s += corr.r_t(0, m) * corr.r_t(0, m);

  if (n == 1) {
    corr.r_diag = Eigen::VectorXd::Ones(1);
    return corr;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr.r_t);
  if (eig.eigenvalues().minCoeff() <= 1e-10) {
    throw NumericalError("degenerate Jakes correlation matrix at spacing " +
                         std::to_string(spacing_mm) + " mm (not positive definite)");
  }
  const Eigen::MatrixXd inv = eig.eigenvectors() *
                              eig.eigenvalues().cwiseInverse().asDiagonal() *
                              eig.eigenvectors().transpose();
  corr.r_diag = inv.diagonal();
  return corr;
}

double spacing_objective(int antenna_count, double spacing_mm, double wavelength_mm) {
  double sum = 0.0;
  for (int m = 1; m < antenna_count; ++m) {
    const double c = bessel_j0(2.0 * M_PI * spacing_mm * m / wavelength_mm);
    sum += c * c;
  }
  return sum;
}

SpacingResult optimize_spacing(int antenna_count, double device_size_mm, double wavelength_mm,
                               int grid_points) {
  if (antenna_count < 2) {
    throw ConfigError("spacing optimization is undefined for a single antenna");
  }
  if (!(device_size_mm > 0.0)) throw ConfigError("device size must be positive");
  if (grid_points < 3) throw ConfigError("grid must contain at least three points");

  const double max_spacing = device_size_mm / (antenna_count - 1);
  const auto objective = [&](double d) {
    return spacing_objective(antenna_count, d, wavelength_mm);
  };

  std::vector<double> value(grid_points + 1);
  for (int i = 1; i <= grid_points; ++i) value[i] = objective(max_spacing * i / grid_points);

  // Golden-section polish inside one basin of the (multimodal) objective.
  const auto refine = [&](double lo, double hi) {
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    for (int it = 0; it < 90 && (b - a) > 1e-13 * max_spacing; ++it) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = objective(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = objective(x2);
      }
    }
    const double d = 0.5 * (a + b);
    return SpacingResult{d, objective(d)};
  };

  // Candidates: every interior grid valley (polished) plus the boundary point.
  std::vector<SpacingResult> candidates;
  for (int i = 2; i < grid_points; ++i) {
    if (value[i] <= value[i - 1] && value[i] <= value[i + 1]) {
      candidates.push_back(
          refine(max_spacing * (i - 1) / grid_points, max_spacing * (i + 1) / grid_points));
    }
  }
  candidates.push_back({max_spacing, value[grid_points]});
  if (value[1] <= value[2]) {
    candidates.push_back(refine(max_spacing * 1e-6, max_spacing * 2.0 / grid_points));
  }

  double lowest = candidates.front().eps_s;
  for (const SpacingResult& c : candidates) lowest = std::min(lowest, c.eps_s);
  // Several spacings can reach the floor of the objective (every Bessel zero
  // inside the interval does); the smallest such spacing is the answer.
  SpacingResult best{max_spacing, value[grid_points]};
  for (const SpacingResult& c : candidates) {
    if (c.eps_s <= lowest + 1e-12 && c.spacing_mm < best.spacing_mm) best = c;
  }
  return best;
}

TxCorrelation correlation_for_device(int antenna_count, double device_size_mm,
                                     double wavelength_mm, SpacingPolicy policy,
                                     int grid_points) {
  if (antenna_count == 1) return jakes_matrix(1, wavelength_mm / 2.0, wavelength_mm);
  double spacing = device_size_mm / (antenna_count - 1);
  if (policy == SpacingPolicy::Optimized) {
    spacing = optimize_spacing(antenna_count, device_size_mm, wavelength_mm, grid_points).spacing_mm;
  }
  return jakes_matrix(antenna_count, spacing, wavelength_mm);
}

}  // namespace smmimo
