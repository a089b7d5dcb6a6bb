#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "smmimo/bounds.hpp"
#include "smmimo/correlation.hpp"
#include "smmimo/geometry.hpp"
#include "smmimo/rng.hpp"

namespace smmimo {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long count = 0;
};

/// One fading realization: channels from every UE of every cell to the home
/// BS, stacked column-wise as (cell, ue, antenna).
struct ChannelRealization {
  Eigen::MatrixXcd columns;  // M x (cells * K * N)
  int cells = 0;
  int ues = 0;
  int antennas = 0;

  int col(int cell, int ue, int antenna) const {
    return (cell * ues + ue) * antennas + antenna;
  }
  Eigen::MatrixXcd::ConstColsBlockXpr ue_block(int cell, int ue) const {
    return columns.middleCols(col(cell, ue, 0), antennas);
  }
};

/// Correlated Rayleigh generator. Realizations are i.i.d. and bit-reproducible
/// per (seed, index), so draws can be evaluated on any number of workers.
class ChannelSampler {
 public:
  ChannelSampler(const NetworkScenario& scenario, const TxCorrelation& corr, int bs_antennas,
                 std::uint64_t seed);

  ChannelRealization draw(long index) const;
  const Eigen::MatrixXd& sqrt_correlation() const { return sqrt_rt_; }

 private:
  const NetworkScenario* scenario_;
  Eigen::MatrixXd sqrt_rt_;
  Eigen::MatrixXcd sqrt_rt_complex_;
  int bs_antennas_;
  std::uint64_t seed_;
};

/// Pilot-despread channel estimates for the home cell's UEs: truth plus the
/// pilot-sharing cells' channels (scaled by their power control) plus
/// estimation noise. Columns ordered (ue, antenna).
Eigen::MatrixXcd estimate_channels(const ChannelRealization& realization,
                                   const NetworkScenario& scenario, const SystemParams& params,
                                   Xoshiro256pp& noise_rng);

/// Zero-forcing combiner columns G with G^H * estimate = I, computed through a
/// thin QR factorization rather than the normal equations, for conditioning.
Eigen::MatrixXcd zf_combiner(const Eigen::MatrixXcd& estimate);

/// Monte-Carlo estimate of the effective SINR reciprocals under linear
/// combining with imperfect estimates: averages the signal, interference and
/// combiner-norm expectations over `draws` realizations and assembles the
/// worst-case-Gaussian SINR. Standard errors from 20 draw blocks.
/// `perfect_csi` bypasses estimation (combiners built from true channels).
SinrProfile sinr_lemma1(const SystemParams& params, const NetworkScenario& scenario,
                        const TxCorrelation& corr, Combiner combiner, long draws,
                        std::uint64_t seed, int threads = 1, bool perfect_csi = false);

struct MiResult {
  Eigen::VectorXd rate;    // (T-B)/T * MI per UE, bits/s/Hz
  Eigen::VectorXd rate_se;
  double sum_rate = 0.0;
  double sum_rate_se = 0.0;
};

/// Mutual information of the equivalent per-UE detection channel whose output
/// is an N-component Gaussian mixture: output entropy by Monte Carlo minus the
/// exact noise entropy, scaled by the data-time fraction.
MiResult mutual_information(const SystemParams& params, const SinrProfile& sinr, long samples,
                            std::uint64_t seed, int threads = 1);

/// Brute-force antenna-detection success frequency for the equivalent AWGN
/// channel, with a binomial error bar.
McEstimate detection_pc_oracle(int antenna_count, double sigma_sq, long trials,
                               std::uint64_t seed, int threads = 1);

}  // namespace smmimo
