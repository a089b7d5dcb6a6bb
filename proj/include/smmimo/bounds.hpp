#pragma once

#include <Eigen/Dense>

#include "smmimo/common.hpp"
#include "smmimo/correlation.hpp"
#include "smmimo/geometry.hpp"

namespace smmimo {

/// Operating point of one cell. All noise/power quantities enter through the
/// single effective ratio snr_eff = P_u / sigma_N^2; absolute powers never do.
struct SystemParams {
  int bs_antennas = 512;    // M
  int ue_antennas = 2;      // N, 1 or a power of two
  int ues_per_cell = 10;    // K
  int frame_symbols = 1000; // T
  int reuse_factor = 3;     // omega
  double snr_eff = 10.0;    // linear
  Combiner combiner = Combiner::ZF;
  double theta_override = -1.0;  // < 0 selects the built-in per-omega value

  int pilot_symbols() const { return reuse_factor * ue_antennas * ues_per_cell; }
  double time_fraction() const {
    return static_cast<double>(frame_symbols - pilot_symbols()) / frame_symbols;
  }
  /// Cross-UE leakage scaling in the ZF reciprocal: 0.2 at reuse 1, 0.01 above.
  double theta() const {
    if (theta_override >= 0.0) return theta_override;
    return reuse_factor == 1 ? 0.2 : 0.01;
  }
  void validate() const;  // throws ConfigError / InfeasibleError
};

enum class SinrSource { ClosedFormFixed, ClosedFormRandom, MonteCarlo };

/// Per-UE, per-antenna SINR reciprocals. sigma_sq(k) is the row mean, the
/// noise variance of UE k's equivalent detection channel.
struct SinrProfile {
  Eigen::MatrixXd inv_sinr;     // K x N
  Eigen::MatrixXd inv_sinr_se;  // standard errors (Monte Carlo only, else empty)
  SinrSource provenance = SinrSource::ClosedFormFixed;

  Eigen::VectorXd sigma_sq() const { return inv_sinr.rowwise().mean(); }
};

struct SeResult {
  Eigen::VectorXd rate;               // bits/s/Hz per UE
  double sum_rate = 0.0;
  Eigen::VectorXd shannon_term;       // log2(1 + N / sigma^2)
  Eigen::VectorXd detection_penalty;  // Pc log2 Pc + (1-Pc) log2((1-Pc)/(N-1)), in [-log2 N, 0]
  Eigen::VectorXd p_c;
  double index_term = 0.0;            // log2 N
  double time_fraction = 0.0;
};

/// Probability that a max-magnitude detector on the equivalent AWGN channel
/// picks the active antenna. Exact alternating-binomial form for N <= 16,
/// adaptive quadrature of the order-statistics integral beyond; the two paths
/// agree to 1e-9 at the crossover. Lies in [1/N, 1] without clamping.
double detection_probability(int antenna_count, double sigma_sq);
double detection_probability_series(int antenna_count, double sigma_sq);
double detection_probability_integral(int antenna_count, double sigma_sq);

/// Alternating sum C(N-2, r) (-1)^r / (r+1) over r; analytically 1/(N-1).
/// Evaluated through the equivalent integer-binomial regrouping so partial
/// sums stay exact.
double detection_denominator(int antenna_count);

/// Spectral-efficiency lower bound for an SM user (N >= 2): Shannon term of the
/// symbol channel, the log2 N index bits, and the detection entropy penalty,
/// scaled by the effective data-time fraction (T - B)/T.
SeResult se_lower_bound_fixed(const SystemParams& params, const SinrProfile& sinr);

/// Single-antenna baseline (N = 1): plain Shannon rate on the scalar channel.
SeResult se_single_antenna(const SystemParams& params, const SinrProfile& sinr);

/// Routes on params.ue_antennas.
SeResult spectral_efficiency(const SystemParams& params, const SinrProfile& sinr);

// ---- Closed-form SINR reciprocals, fixed UE locations ----

SinrProfile inv_sinr_mr_fixed(const SystemParams& params, const AttenuationProfile& atten,
                              const TxCorrelation& corr, const CellLayout& layout);
SinrProfile inv_sinr_zf_fixed(const SystemParams& params, const AttenuationProfile& atten,
                              const TxCorrelation& corr, const CellLayout& layout);
SinrProfile inv_sinr_fixed(const SystemParams& params, const AttenuationProfile& atten,
                           const TxCorrelation& corr, const CellLayout& layout);

/// Large-M limits of the fixed-location reciprocals (pilot contamination and
/// transmit correlation only).
SinrProfile inv_sinr_fixed_limit(const SystemParams& params, const AttenuationProfile& atten,
                                 const TxCorrelation& corr, const CellLayout& layout);

// ---- Closed-form SINR reciprocals, random UE locations (spatial moments) ----

/// include_variance adds the finite-M variance correction of mu to the
/// location-averaged reciprocals; off by default since it vanishes as M grows.
SinrProfile inv_sinr_random(const SystemParams& params, const InterferenceMoments& moments,
                            const TxCorrelation& corr, const CellLayout& layout,
                            bool include_variance = false);
SinrProfile inv_sinr_random_limit(const SystemParams& params, const InterferenceMoments& moments,
                                  const TxCorrelation& corr, const CellLayout& layout);

/// Location-averaged SE lower bound; identical for every UE by symmetry of the
/// power control, so rate(k) is constant across k.
SeResult se_random_lb(const SystemParams& params, const InterferenceMoments& moments,
                      const TxCorrelation& corr, const CellLayout& layout,
                      bool include_variance = false);

}  // namespace smmimo
