#pragma once

#include <string>
#include <vector>

#include "smmimo/bounds.hpp"
#include "smmimo/montecarlo.hpp"

namespace smmimo {

struct SweepJob {
  std::string axis;
  std::vector<double> values;
};

/// One-dimensional parameter grid. Every (value, omega, combiner, N)
/// combination is evaluated; infeasible combinations are kept as flagged rows
/// rather than dropped.
struct SweepGrid {
  std::string axis;  // one of M, K, T, omega, N, snr_eff, D_m
  std::vector<double> values;
  std::vector<int> omegas;  // empty means just base.reuse_factor
  SystemParams base;
  std::vector<int> candidate_n = {1, 2, 4, 8, 16};
  std::vector<Combiner> combiners = {Combiner::MR, Combiner::ZF};
  double device_size_mm = 100.0;
  double wavelength_mm = 60.0;
  SpacingPolicy spacing = SpacingPolicy::MaxSpread;
  int spacing_grid_points = 10000;
  bool include_variance = false;
};

struct SweepRow {
  std::string axis;
  double value = 0.0;
  int omega = 0;
  Combiner combiner = Combiner::MR;
  int ue_antennas = 0;
  bool feasible = false;
  std::string reason;  // empty when feasible
  double per_ue_rate = 0.0;
  double sum_rate = 0.0;
  bool is_n_star = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Rates from the location-averaged closed form; the sweep layer adds nothing
/// beyond feasibility checks, the argmax over N, and the sum over K users.
SweepResult evaluate_grid(const SweepGrid& grid, const InterferenceMoments& moments,
                          double cell_radius);

struct OptimizeNResult {
  int n_star = -1;  // -1 when no candidate is feasible
  std::vector<SweepRow> table;
};

OptimizeNResult optimize_n(const SystemParams& params, const InterferenceMoments& moments,
                           double cell_radius, const std::vector<int>& candidate_n,
                           double device_size_mm, double wavelength_mm,
                           SpacingPolicy spacing = SpacingPolicy::MaxSpread,
                           bool include_variance = false);

struct TightnessRow {
  std::string mode;  // "fixed" or "random"
  Combiner combiner = Combiner::MR;
  int bs_antennas = 0;
  double bound_sum_rate = 0.0;
  double sim_sum_rate = 0.0;
  double sim_se = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  long draws = 0;
  long mi_samples = 0;
};

/// Fixed-location tightness: channel-level Monte Carlo (SINR expectations plus
/// the mixture-entropy rate) against the closed-form bound, per M and combiner.
std::vector<TightnessRow> tightness_fixed(const SystemParams& base,
                                          const NetworkScenario& scenario,
                                          const TxCorrelation& corr,
                                          const std::vector<int>& m_values,
                                          const std::vector<Combiner>& combiners, long draws,
                                          long mi_samples, std::uint64_t seed, int threads);

/// Random-location tightness: the per-placement closed-form rate averaged over
/// fresh uniform placements against the moment-based bound.
std::vector<TightnessRow> tightness_random(const SystemParams& base, const CellLayout& layout,
                                           const InterferenceMoments& moments,
                                           const TxCorrelation& corr,
                                           const std::vector<int>& m_values,
                                           const std::vector<Combiner>& combiners,
                                           long placement_draws, double path_loss_exponent,
                                           double min_distance, std::uint64_t seed, int threads);

/// Disk cache for spatial moments, keyed by a content fingerprint of the
/// geometry, distribution and sampling budget. Safe for concurrent writers of
/// the same fingerprint (atomic rename, identical content).
struct MomentSpec {
  double cell_radius = 500.0;
  double path_loss_exponent = 3.7;
  double min_distance = 50.0;
  long samples = 50000;
  std::uint64_t seed = 1;
};

std::string moment_fingerprint(const MomentSpec& spec);
InterferenceMoments cached_moments(const std::string& cache_dir, const CellLayout& layout,
                                   const MomentSpec& spec, int threads);

}  // namespace smmimo
