#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace smmimo {

/// Two-ring hexagonal network: cell 0 at the origin plus 18 neighbors
/// (6 on the first ring, 12 on the second). Pointy-top hexagons with
/// circumradius `cell_radius`; adjacent centers sit sqrt(3)*r_c apart.
struct CellLayout {
  double cell_radius = 0.0;                 // r_c, meters
  int reuse_factor = 1;                     // omega
  std::vector<Eigen::Vector2d> centers;     // index 0 is the home cell
  std::vector<int> axial_u, axial_v;        // hex-grid coordinates of each center
  std::vector<int> reuse_group;             // pilot-reuse label per cell
  std::vector<int> cochannel;               // cells sharing cell 0's pilots, cell 0 excluded

  int cell_count() const { return static_cast<int>(centers.size()); }
  bool shares_pilots(int cell) const;       // true for cell 0 and every cochannel cell
};

CellLayout build_layout(double cell_radius, int reuse_factor);

enum class PlacementMode { FixedRing, UniformRandom };

struct UePlacement {
  PlacementMode mode = PlacementMode::FixedRing;
  double min_distance = 0.0;
  std::vector<Eigen::Matrix2Xd> positions;  // per cell, one column per UE (absolute coords)

  int ues_per_cell() const { return positions.empty() ? 0 : static_cast<int>(positions[0].cols()); }
};

/// FixedRing: K UEs equally spaced in angle on `ring_radius` around their
/// serving BS, first UE at angle 0. UniformRandom: K independent uniform draws
/// over the serving hexagon, resampled until at least `min_distance` from the
/// BS; reproducible from `seed`.
UePlacement place_ues(const CellLayout& layout, int ues_per_cell, PlacementMode mode,
                      double ring_radius, double min_distance, std::uint64_t seed);

/// Large-scale gains beta(l, j, k) = (d / r_min)^(-alpha) for BS l and UE k of
/// cell j, plus the interference ratios mu(j, k) = beta(0,j,k) / beta(j,j,k).
struct AttenuationProfile {
  double path_loss_exponent = 0.0;
  double min_distance = 0.0;
  std::vector<Eigen::MatrixXd> beta;  // beta[l](j, k)
  Eigen::MatrixXd mu;                 // (cells x K)
};

AttenuationProfile attenuation(const CellLayout& layout, const UePlacement& placement,
                               double path_loss_exponent, double min_distance);

struct NetworkScenario {
  CellLayout layout;
  UePlacement placement;
  AttenuationProfile atten;
};

NetworkScenario make_scenario(const CellLayout& layout, int ues_per_cell, PlacementMode mode,
                              double ring_radius, double min_distance, double path_loss_exponent,
                              std::uint64_t seed);

/// Spatial moments of mu over a uniform UE distribution, one independent batch
/// of placements per cell. Cell 0 is exact (mu identically 1).
struct InterferenceMoments {
  Eigen::VectorXd mu_bar1;      // E{mu}
  Eigen::VectorXd mu_bar2;      // E{mu^2}
  Eigen::VectorXd mu_var;       // Var(mu), unbiased
  Eigen::VectorXd se1, se2;     // standard errors of the two moment estimates
  long sample_count = 0;
};

InterferenceMoments spatial_moments(const CellLayout& layout, double path_loss_exponent,
                                    double min_distance, long sample_count, std::uint64_t seed,
                                    int threads = 1);

/// True if `point` lies inside the pointy-top hexagon of circumradius r_c at `center`.
bool in_hexagon(const Eigen::Vector2d& point, const Eigen::Vector2d& center, double cell_radius);

}  // namespace smmimo
