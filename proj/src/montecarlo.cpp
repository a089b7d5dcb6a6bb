#include "smmimo/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace smmimo {
namespace {

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& matrix) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix);
  Eigen::VectorXd values = eig.eigenvalues();
  for (int i = 0; i < values.size(); ++i) {
    if (values(i) < -1e-12) {
      throw NumericalError("correlation matrix square root failed (eigenvalue " +
                           std::to_string(values(i)) + ")");
    }
    values(i) = std::sqrt(std::max(0.0, values(i)));
  }
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

void run_sharded(long count, int threads, const std::function<void(long, long)>& work) {
  if (threads <= 1 || count < 2 * threads) {
    work(0, count);
    return;
  }
  std::vector<std::thread> pool;
  const long chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long begin = t * chunk;
    const long end = std::min(count, begin + chunk);
    if (begin < end) pool.emplace_back(work, begin, end);
  }
  for (auto& th : pool) th.join();
}

double mean_of(const std::vector<double>& values, long begin, long end) {
  return pairwise_sum(values.data() + begin, static_cast<std::size_t>(end - begin)) /
         static_cast<double>(end - begin);
}

}  // namespace

ChannelSampler::ChannelSampler(const NetworkScenario& scenario, const TxCorrelation& corr,
                               int bs_antennas, std::uint64_t seed)
    : scenario_(&scenario),
      sqrt_rt_(symmetric_sqrt(corr.r_t)),
      sqrt_rt_complex_(sqrt_rt_.cast<std::complex<double>>()),
      bs_antennas_(bs_antennas),
      seed_(seed) {
  if (bs_antennas < 1) throw ConfigError("need at least one BS antenna");
}

ChannelRealization ChannelSampler::draw(long index) const {
  const CellLayout& layout = scenario_->layout;
  const int cells = layout.cell_count();
  const int ues = scenario_->placement.ues_per_cell();
  const int n = static_cast<int>(sqrt_rt_.rows());
  const int m = bs_antennas_;

  ChannelRealization real;
  real.cells = cells;
  real.ues = ues;
  real.antennas = n;
  real.columns.resize(m, cells * ues * n);

  auto rng = derive_stream(seed_, "mc/channel", static_cast<std::uint64_t>(index));
  Eigen::MatrixXcd iid(m, n);
  for (int j = 0; j < cells; ++j) {
    for (int k = 0; k < ues; ++k) {
      for (int a = 0; a < n; ++a) {
        for (int r = 0; r < m; ++r) iid(r, a) = complex_normal(rng);
      }
      const double amp = std::sqrt(scenario_->atten.beta[0](j, k));
      real.columns.middleCols(real.col(j, k, 0), n).noalias() = amp * iid * sqrt_rt_complex_;
    }
  }
  return real;
}

Eigen::MatrixXcd estimate_channels(const ChannelRealization& realization,
                                   const NetworkScenario& scenario, const SystemParams& params,
                                   Xoshiro256pp& noise_rng) {
  const CellLayout& layout = scenario.layout;
  const AttenuationProfile& atten = scenario.atten;
  const int n = params.ue_antennas;
  const int k_ues = params.ues_per_cell;
  const int m = static_cast<int>(realization.columns.rows());

  Eigen::MatrixXcd estimate(m, k_ues * n);
  for (int k = 0; k < k_ues; ++k) {
    const double beta_home = atten.beta[0](0, k);
    const double noise_scale =
        std::sqrt(beta_home / (params.reuse_factor * k_ues * params.snr_eff));
    for (int a = 0; a < n; ++a) {
      auto col = estimate.col(k * n + a);
      col = realization.columns.col(realization.col(0, k, a));
      for (int j : layout.cochannel) {
        col += std::sqrt(beta_home / atten.beta[j](j, k)) *
               realization.columns.col(realization.col(j, k, a));
      }
      for (int r = 0; r < m; ++r) col(r) += noise_scale * complex_normal(noise_rng);
    }
  }
  return estimate;
}

// Thin-QR zero forcer: G = Q R^{-H}, so that G^H Hhat = I.
Eigen::MatrixXcd zf_combiner(const Eigen::MatrixXcd& estimate) {
  const int nk = static_cast<int>(estimate.cols());
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(estimate);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(estimate.rows(), nk);
  Eigen::MatrixXcd r = qr.matrixQR().topRows(nk).triangularView<Eigen::Upper>();
  Eigen::MatrixXcd rinv_h =
      r.adjoint().triangularView<Eigen::Lower>().solve(Eigen::MatrixXcd::Identity(nk, nk));
  return q * rinv_h;
}

SinrProfile sinr_lemma1(const SystemParams& params, const NetworkScenario& scenario,
                        const TxCorrelation& corr, Combiner combiner, long draws,
                        std::uint64_t seed, int threads, bool perfect_csi) {
  SystemParams p = params;
  p.combiner = combiner;
  p.validate();
  if (draws < 1) throw ConfigError("need at least one channel draw");

  const CellLayout& layout = scenario.layout;
  const AttenuationProfile& atten = scenario.atten;
  const int cells = layout.cell_count();
  const int k_ues = p.ues_per_cell;
  const int n_ant = p.ue_antennas;
  const int nk = k_ues * n_ant;
  const int total_cols = cells * nk;
  const double snr = p.snr_eff;

  // Per-column transmit powers under statistics-aware power control.
  Eigen::VectorXd col_power(total_cols);
  for (int j = 0; j < cells; ++j) {
    for (int k = 0; k < k_ues; ++k) {
      const double power = snr / atten.beta[j](j, k);
      for (int a = 0; a < n_ant; ++a) col_power((j * k_ues + k) * n_ant + a) = power;
    }
  }

  ChannelSampler sampler(scenario, corr, p.bs_antennas, seed);

  // Per-draw statistics, draw-major, reduced pairwise afterwards so the result
  // does not depend on the thread count.
  const std::size_t sz = static_cast<std::size_t>(draws) * nk;
  std::vector<double> sig_re(sz), sig_im(sz), interference(sz), combiner_norm(sz);

  auto work = [&](long begin, long end) {
    for (long d = begin; d < end; ++d) {
      const ChannelRealization real = sampler.draw(d);
      Eigen::MatrixXcd g;
      if (perfect_csi) {
        g = real.columns.middleCols(0, nk);
      } else {
        auto noise_rng = derive_stream(seed, "mc/estnoise", static_cast<std::uint64_t>(d));
        const Eigen::MatrixXcd estimate = estimate_channels(real, scenario, p, noise_rng);
        g = (combiner == Combiner::MR) ? estimate : zf_combiner(estimate);
        if (combiner == Combiner::ZF) {
          const double residual =
              (g.adjoint() * estimate - Eigen::MatrixXcd::Identity(nk, nk)).cwiseAbs().maxCoeff();
          if (!(residual < 1e-8)) {
            throw NumericalError("ZF combiner lost orthogonality at draw " + std::to_string(d));
          }
        }
      }
      if (!g.allFinite()) {
        throw NumericalError("non-finite combiner at draw " + std::to_string(d));
      }

      const Eigen::MatrixXcd cross = g.adjoint() * real.columns;  // nk x total_cols
      for (int i = 0; i < nk; ++i) {
        const std::size_t at = static_cast<std::size_t>(d) * nk + i;
        const std::complex<double> s = cross(i, i);  // home-cell block leads, col(0,k,a) = i
        sig_re[at] = s.real();
        sig_im[at] = s.imag();
        interference[at] = (cross.row(i).cwiseAbs2() * col_power)(0);
        combiner_norm[at] = g.col(i).squaredNorm();
      }
    }
  };
  run_sharded(draws, threads, work);

  auto gather = [&](const std::vector<double>& src, int i, long begin, long end,
                    std::vector<double>& scratch) {
    scratch.resize(static_cast<std::size_t>(end - begin));
    for (long d = begin; d < end; ++d) {
      scratch[static_cast<std::size_t>(d - begin)] = src[static_cast<std::size_t>(d) * nk + i];
    }
    return mean_of(scratch, 0, end - begin);
  };

  auto assemble = [&](int i, double mr, double mi, double mint, double mnorm) {
    const double signal = col_power(i) / n_ant * (mr * mr + mi * mi);
    const double denom = mint / n_ant - signal + mnorm;  // noise power is 1 by normalization
    return denom / signal;
  };

  SinrProfile out;
  out.provenance = SinrSource::MonteCarlo;
  out.inv_sinr.resize(k_ues, n_ant);
  out.inv_sinr_se.resize(k_ues, n_ant);

  const int blocks = static_cast<int>(std::min<long>(20, draws));
  std::vector<double> scratch;
  std::vector<double> block_values(blocks);
  for (int k = 0; k < k_ues; ++k) {
    for (int a = 0; a < n_ant; ++a) {
      const int i = k * n_ant + a;
      const double mr = gather(sig_re, i, 0, draws, scratch);
      const double mi = gather(sig_im, i, 0, draws, scratch);
      const double mint = gather(interference, i, 0, draws, scratch);
      const double mnorm = gather(combiner_norm, i, 0, draws, scratch);
      out.inv_sinr(k, a) = assemble(i, mr, mi, mint, mnorm);

      for (int b = 0; b < blocks; ++b) {
        const long begin = draws * b / blocks;
        const long end = draws * (b + 1) / blocks;
        block_values[b] = assemble(i, gather(sig_re, i, begin, end, scratch),
                                   gather(sig_im, i, begin, end, scratch),
                                   gather(interference, i, begin, end, scratch),
                                   gather(combiner_norm, i, begin, end, scratch));
      }
      double var = 0.0;
      const double bm = pairwise_sum(block_values.data(), block_values.size()) / blocks;
      for (double v : block_values) var += (v - bm) * (v - bm);
      var = blocks > 1 ? var / (blocks - 1) : 0.0;
      out.inv_sinr_se(k, a) = std::sqrt(var / blocks);
    }
  }
  return out;
}

MiResult mutual_information(const SystemParams& params, const SinrProfile& sinr, long samples,
                            std::uint64_t seed, int threads) {
  if (samples < 1) throw ConfigError("need at least one sample");
  const int n = params.ue_antennas;
  const int k_ues = static_cast<int>(sinr.inv_sinr.rows());
  const double tf = params.time_fraction();
  const double ln2 = std::log(2.0);

  MiResult result;
  result.rate.resize(k_ues);
  result.rate_se.resize(k_ues);

  std::vector<double> sample_bits(static_cast<std::size_t>(samples));
  for (int k = 0; k < k_ues; ++k) {
    const Eigen::VectorXd v = sinr.inv_sinr.row(k).transpose();  // noise variances per branch
    double noise_entropy_bits = 0.0;
    for (int t = 0; t < n; ++t) noise_entropy_bits += std::log2(M_PI * M_E * v(t));

    auto work = [&](long begin, long end) {
      Eigen::VectorXd abs2(n);
      Eigen::VectorXd logp(n);
      for (long s = begin; s < end; ++s) {
        auto rng = derive_stream(seed, "mc/mi",
                                 (static_cast<std::uint64_t>(k) << 40) | static_cast<std::uint64_t>(s));
        const int active = std::min(n - 1, static_cast<int>(uniform01(rng) * n));
        const std::complex<double> symbol = std::sqrt(static_cast<double>(n)) * complex_normal(rng);
        double base = 0.0;
        for (int t = 0; t < n; ++t) {
          std::complex<double> y = std::sqrt(v(t)) * complex_normal(rng);
          if (t == active) y += symbol;
          abs2(t) = std::norm(y);
          base -= std::log(M_PI * v(t)) + abs2(t) / v(t);
        }
        // Mixture component t restores branch t's variance to v_t + N.
        for (int t = 0; t < n; ++t) {
          logp(t) = base + std::log(v(t) / (v(t) + n)) + abs2(t) * (1.0 / v(t) - 1.0 / (v(t) + n));
        }
        const double peak = logp.maxCoeff();
        double acc = 0.0;
        for (int t = 0; t < n; ++t) acc += std::exp(logp(t) - peak);
        const double log_density = peak + std::log(acc) - std::log(static_cast<double>(n));
        sample_bits[static_cast<std::size_t>(s)] = -log_density / ln2;
      }
    };
    run_sharded(samples, threads, work);

    const double out_entropy = mean_of(sample_bits, 0, samples);
    double var = 0.0;
    for (double b : sample_bits) var += (b - out_entropy) * (b - out_entropy);
    var /= std::max<long>(1, samples - 1);
    const double mi = out_entropy - noise_entropy_bits;
    result.rate(k) = tf * mi;
    result.rate_se(k) = tf * std::sqrt(var / samples);
  }
  result.sum_rate = result.rate.sum();
  result.sum_rate_se = std::sqrt(result.rate_se.array().square().sum());
  return result;
}

McEstimate detection_pc_oracle(int antenna_count, double sigma_sq, long trials,
                               std::uint64_t seed, int threads) {
  if (antenna_count < 2) throw std::domain_error("detection needs at least two antennas");
  if (trials < 1) throw ConfigError("need at least one trial");
  const int n = antenna_count;
  const double noise_amp = std::sqrt(sigma_sq);
  const double symbol_amp = std::sqrt(static_cast<double>(n));

  std::vector<long> shard_hits(static_cast<std::size_t>(std::max(threads, 1)), 0);
  std::vector<std::thread> pool;
  const int workers = std::max(threads, 1);
  const long chunk = (trials + workers - 1) / workers;
  auto work = [&](int w, long begin, long end) {
    long hits = 0;
    for (long t = begin; t < end; ++t) {
      auto rng = derive_stream(seed, "mc/detect", static_cast<std::uint64_t>(t));
      const int active = std::min(n - 1, static_cast<int>(uniform01(rng) * n));
      const std::complex<double> symbol = symbol_amp * complex_normal(rng);
      int best = 0;
      double best_mag = -1.0;
      for (int a = 0; a < n; ++a) {
        std::complex<double> y = noise_amp * complex_normal(rng);
        if (a == active) y += symbol;
        const double mag = std::norm(y);
        if (mag > best_mag) {
          best_mag = mag;
          best = a;
        }
      }
      if (best == active) ++hits;
    }
    shard_hits[static_cast<std::size_t>(w)] = hits;
  };
  if (workers == 1) {
    work(0, 0, trials);
  } else {
    for (int w = 0; w < workers; ++w) {
      const long begin = w * chunk;
      const long end = std::min(trials, begin + chunk);
      if (begin < end) pool.emplace_back(work, w, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  long hits = 0;
  for (long h : shard_hits) hits += h;
  McEstimate est;
  est.count = trials;
  est.value = static_cast<double>(hits) / trials;
  est.std_error = std::sqrt(est.value * (1.0 - est.value) / trials);
  return est;
}

}  // namespace smmimo
