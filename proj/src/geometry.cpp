#include "smmimo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "smmimo/common.hpp"
#include "smmimo/rng.hpp"

namespace smmimo {
namespace {

int positive_mod(int a, int m) { return ((a % m) + m) % m; }

// Pilot-reuse label of the cell at axial (u, v). The labels (u + 2v) mod omega
// give a proper coloring of the hex grid for omega in {3, 4}: adjacent cells
// differ by +-1 or +-2, never 0 mod omega.
int reuse_label(int u, int v, int omega) {
  if (omega == 1) return 0;
  return positive_mod(u + 2 * v, omega);
}

}  // namespace

bool CellLayout::shares_pilots(int cell) const {
  return reuse_group[cell] == reuse_group[0];
}

CellLayout build_layout(double cell_radius, int reuse_factor) {
  if (reuse_factor != 1 && reuse_factor != 3 && reuse_factor != 4) {
    throw ConfigError("unsupported pilot reuse factor " + std::to_string(reuse_factor) +
                      " (allowed: 1, 3, 4)");
  }
  if (!(cell_radius > 0.0)) throw ConfigError("cell radius must be positive");

  CellLayout layout;
  layout.cell_radius = cell_radius;
  layout.reuse_factor = reuse_factor;

  const double pitch = std::sqrt(3.0) * cell_radius;  // center-to-center distance

  // Cell 0 first, then the two rings in ring-major order.
  std::vector<std::pair<int, int>> axial;
  axial.emplace_back(0, 0);
  for (int ring = 1; ring <= 2; ++ring) {
    // Walk the hex ring starting at (ring, 0).
    static const int du[6] = {-1, -1, 0, 1, 1, 0};
    static const int dv[6] = {1, 0, -1, -1, 0, 1};
    int u = ring, v = 0;
    for (int side = 0; side < 6; ++side) {
      for (int step = 0; step < ring; ++step) {
        axial.emplace_back(u, v);
        u += du[side];
        v += dv[side];
      }
    }
  }

  for (auto [u, v] : axial) {
    layout.axial_u.push_back(u);
    layout.axial_v.push_back(v);
    layout.centers.emplace_back(pitch * (u + 0.5 * v), pitch * (std::sqrt(3.0) / 2.0) * v);
    layout.reuse_group.push_back(reuse_label(u, v, reuse_factor));
  }
  for (int j = 1; j < layout.cell_count(); ++j) {
    if (layout.reuse_group[j] == layout.reuse_group[0]) layout.cochannel.push_back(j);
  }
  return layout;
}

bool in_hexagon(const Eigen::Vector2d& point, const Eigen::Vector2d& center, double cell_radius) {
  const double x = point.x() - center.x();
  const double y = point.y() - center.y();
  const double h = std::sqrt(3.0) / 2.0 * cell_radius;  // inradius
  const double s = std::sqrt(3.0) / 2.0;
  return std::abs(x) <= h && std::abs(0.5 * x + s * y) <= h && std::abs(-0.5 * x + s * y) <= h;
}

namespace {

Eigen::Vector2d sample_in_cell(const CellLayout& layout, int cell, double min_distance,
                               Xoshiro256pp& rng) {
  const Eigen::Vector2d& c = layout.centers[cell];
  const double r_c = layout.cell_radius;
  const double half_w = std::sqrt(3.0) / 2.0 * r_c;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double x = (2.0 * uniform01(rng) - 1.0) * half_w;
    const double y = (2.0 * uniform01(rng) - 1.0) * r_c;
    Eigen::Vector2d p = c + Eigen::Vector2d(x, y);
    if (!in_hexagon(p, c, r_c)) continue;
    if (std::hypot(x, y) < min_distance) continue;
    return p;
  }
  throw ConfigError("UE placement rejection sampling failed; min distance too close to cell size");
}

}  // namespace

UePlacement place_ues(const CellLayout& layout, int ues_per_cell, PlacementMode mode,
                      double ring_radius, double min_distance, std::uint64_t seed) {
  if (ues_per_cell < 1) throw ConfigError("need at least one UE per cell");
  if (mode == PlacementMode::FixedRing &&
      !(min_distance < ring_radius && ring_radius < layout.cell_radius)) {
    throw ConfigError("fixed-ring placement requires r_min < ring radius < cell radius");
  }

  UePlacement placement;
  placement.mode = mode;
  placement.min_distance = min_distance;
  placement.positions.resize(layout.cell_count());

  for (int j = 0; j < layout.cell_count(); ++j) {
    Eigen::Matrix2Xd pos(2, ues_per_cell);
    if (mode == PlacementMode::FixedRing) {
      for (int k = 0; k < ues_per_cell; ++k) {
        const double angle = 2.0 * M_PI * k / ues_per_cell;
        pos.col(k) = layout.centers[j] +
                     ring_radius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
      }
    } else {
      for (int k = 0; k < ues_per_cell; ++k) {
        auto rng = derive_stream(seed, "geometry/ue", (static_cast<std::uint64_t>(j) << 32) |
                                                          static_cast<std::uint64_t>(k));
        pos.col(k) = sample_in_cell(layout, j, min_distance, rng);
      }
    }
    placement.positions[j] = std::move(pos);
  }
  return placement;
}

AttenuationProfile attenuation(const CellLayout& layout, const UePlacement& placement,
                               double path_loss_exponent, double min_distance) {
  if (!(path_loss_exponent > 2.0)) {
    throw ConfigError("path loss exponent must exceed 2 for finite interference moments");
  }
  const int cells = layout.cell_count();
  const int ues = placement.ues_per_cell();

  AttenuationProfile profile;
  profile.path_loss_exponent = path_loss_exponent;
  profile.min_distance = min_distance;
  profile.beta.assign(cells, Eigen::MatrixXd(cells, ues));
  profile.mu.resize(cells, ues);

  for (int l = 0; l < cells; ++l) {
    for (int j = 0; j < cells; ++j) {
      for (int k = 0; k < ues; ++k) {
        const double d = (placement.positions[j].col(k) - layout.centers[l]).norm();
        if (l == j && d < min_distance * (1.0 - 1e-12)) {
          throw ConfigError("UE closer than r_min to its serving BS");
        }
        profile.beta[l](j, k) = std::pow(d / min_distance, -path_loss_exponent);
      }
    }
  }
  for (int j = 0; j < cells; ++j) {
    for (int k = 0; k < ues; ++k) {
      profile.mu(j, k) = profile.beta[0](j, k) / profile.beta[j](j, k);
    }
  }
  return profile;
}

NetworkScenario make_scenario(const CellLayout& layout, int ues_per_cell, PlacementMode mode,
                              double ring_radius, double min_distance, double path_loss_exponent,
                              std::uint64_t seed) {
  NetworkScenario scenario;
  scenario.layout = layout;
  scenario.placement = place_ues(layout, ues_per_cell, mode, ring_radius, min_distance, seed);
  scenario.atten = attenuation(layout, scenario.placement, path_loss_exponent, min_distance);
  return scenario;
}

InterferenceMoments spatial_moments(const CellLayout& layout, double path_loss_exponent,
                                    double min_distance, long sample_count, std::uint64_t seed,
                                    int threads) {
  if (sample_count < 1) throw ConfigError("moment estimation needs at least one sample");
  if (threads < 1) threads = 1;
  const int cells = layout.cell_count();

  InterferenceMoments m;
  m.mu_bar1 = Eigen::VectorXd::Zero(cells);
  m.mu_bar2 = Eigen::VectorXd::Zero(cells);
  m.mu_var = Eigen::VectorXd::Zero(cells);
  m.se1 = Eigen::VectorXd::Zero(cells);
  m.se2 = Eigen::VectorXd::Zero(cells);
  m.sample_count = sample_count;

  // mu is identically 1 in the home cell.
  m.mu_bar1(0) = 1.0;
  m.mu_bar2(0) = 1.0;

  std::vector<double> mu(static_cast<std::size_t>(sample_count));
  std::vector<double> musq(static_cast<std::size_t>(sample_count));
  for (int j = 1; j < cells; ++j) {
    auto fill = [&](long begin, long end) {
      for (long i = begin; i < end; ++i) {
        auto rng = derive_stream(seed, "geometry/moments",
                                 (static_cast<std::uint64_t>(j) << 40) | static_cast<std::uint64_t>(i));
        const Eigen::Vector2d z = sample_in_cell(layout, j, min_distance, rng);
        const double d_serving = (z - layout.centers[j]).norm();
        const double d_home = (z - layout.centers[0]).norm();
        const double value = std::pow(d_serving / d_home, path_loss_exponent);
        mu[static_cast<std::size_t>(i)] = value;
        musq[static_cast<std::size_t>(i)] = value * value;
      }
    };
    if (threads == 1) {
      fill(0, sample_count);
    } else {
      std::vector<std::thread> pool;
      const long chunk = (sample_count + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        const long begin = t * chunk;
        const long end = std::min<long>(sample_count, begin + chunk);
        if (begin < end) pool.emplace_back(fill, begin, end);
      }
      for (auto& th : pool) th.join();
    }

    const double n = static_cast<double>(sample_count);
    const double mean1 = pairwise_sum(mu.data(), mu.size()) / n;
    const double mean2 = pairwise_sum(musq.data(), musq.size()) / n;
    m.mu_bar1(j) = mean1;
    m.mu_bar2(j) = mean2;
    if (sample_count > 1) {
      const double var1 = std::max(0.0, (mean2 - mean1 * mean1) * n / (n - 1.0));
      m.mu_var(j) = var1;
      m.se1(j) = std::sqrt(var1 / n);
      // Spread of mu^2 around its mean, for the second-moment error bar.
      std::vector<double> dev(musq.size());
      for (std::size_t i = 0; i < musq.size(); ++i) {
        const double d = musq[i] - mean2;
        dev[i] = d * d;
      }
      const double var2 = pairwise_sum(dev.data(), dev.size()) / (n - 1.0);
      m.se2(j) = std::sqrt(var2 / n);
    }
  }
  return m;
}

}  // namespace smmimo
