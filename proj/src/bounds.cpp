#include "smmimo/bounds.hpp"

#include <cmath>
#include <string>

namespace smmimo {
namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

// Adaptive Simpson with absolute tolerance.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

void check_profile(const SinrProfile& sinr, const SystemParams& params) {
  if (sinr.inv_sinr.rows() != params.ues_per_cell || sinr.inv_sinr.cols() != params.ue_antennas) {
    throw ConfigError("SINR profile shape does not match system parameters");
  }
  if (!(sinr.inv_sinr.array() > 0.0).all() || !sinr.inv_sinr.allFinite()) {
    throw NumericalError("SINR reciprocals must be positive and finite");
  }
}

}  // namespace

void SystemParams::validate() const {
  if (bs_antennas < 1) throw ConfigError("M must be positive");
  if (ues_per_cell < 1) throw ConfigError("K must be positive");
  if (reuse_factor != 1 && reuse_factor != 3 && reuse_factor != 4) {
    throw ConfigError("unsupported pilot reuse factor (allowed: 1, 3, 4)");
  }
  if (ue_antennas != 1 && !is_power_of_two(ue_antennas)) {
    throw ConfigError("N must be 1 or a power of two");
  }
  if (!(snr_eff > 0.0)) throw ConfigError("effective SNR must be positive");
  if (pilot_symbols() >= frame_symbols) {
    throw InfeasibleError("pilot overhead B = " + std::to_string(pilot_symbols()) +
                          " does not fit the frame of T = " + std::to_string(frame_symbols));
  }
  if (combiner == Combiner::ZF && bs_antennas <= ue_antennas * ues_per_cell) {
    throw InfeasibleError("ZF needs M > N*K (got M = " + std::to_string(bs_antennas) +
                          ", N*K = " + std::to_string(ue_antennas * ues_per_cell) + ")");
  }
}

double detection_denominator(int antenna_count) {
  const int n = antenna_count;
  if (n < 2) throw std::domain_error("detection denominator needs at least two antennas");
  // C(N-2, r) / (r+1) = C(N-1, r+1) / (N-1): with the division factored out the
  // partial sums are integers, exact in double up to N = 32 and beyond.
  double sum = 0.0;
  for (int r = 0; r <= n - 2; ++r) {
    const double term = static_cast<double>(binomial_u64(n - 1, r + 1));
    sum += (r % 2 == 0) ? term : -term;
  }
  return sum / (n - 1);
}

double detection_probability_series(int antenna_count, double sigma_sq) {
  const int n = antenna_count;
  if (n < 2) throw std::domain_error("detection probability is undefined for a single antenna");
  if (!(sigma_sq > 0.0)) throw std::domain_error("noise variance must be positive");

  const long double b =
      (n + 2.0L * static_cast<long double>(sigma_sq)) / (n + static_cast<long double>(sigma_sq));
  KahanAccumulator numerator;
  for (int r = 0; r <= n - 2; ++r) {
    const long double term = static_cast<long double>(binomial_u64(n - 2, r)) / (r + b);
    numerator.add((r % 2 == 0) ? term : -term);
  }
  return static_cast<double>(numerator.value()) / detection_denominator(n);
}

double detection_probability_integral(int antenna_count, double sigma_sq) {
  const int n = antenna_count;
  if (n < 2) throw std::domain_error("detection probability is undefined for a single antenna");
  if (!(sigma_sq > 0.0)) throw std::domain_error("noise variance must be positive");

  // Substituting t = u / sigma^2 in the order-statistics integral gives
  // (N-1) * int_0^inf (1 - e^-t)^(N-2) e^(-(1+a) t) dt with a = sigma^2/(N+sigma^2).
  const double a = sigma_sq / (n + sigma_sq);
  const auto integrand = [n, a](double t) {
    const double base = 1.0 - std::exp(-t);
    return std::pow(base, n - 2) * std::exp(-(1.0 + a) * t);
  };
  const double upper = 42.0;  // integrand < 1e-18 beyond
  return (n - 1) * integrate(integrand, 0.0, upper, 1e-13);
}

double detection_probability(int antenna_count, double sigma_sq) {
  return antenna_count <= 16 ? detection_probability_series(antenna_count, sigma_sq)
                             : detection_probability_integral(antenna_count, sigma_sq);
}

SeResult se_lower_bound_fixed(const SystemParams& params, const SinrProfile& sinr) {
  params.validate();
  if (params.ue_antennas < 2) {
    throw ConfigError("SM rate bound needs N >= 2; use the single-antenna baseline for N = 1");
  }
  check_profile(sinr, params);

  const int n = params.ue_antennas;
  const int ues = params.ues_per_cell;
  const double tf = params.time_fraction();

  SeResult result;
  result.time_fraction = tf;
  result.index_term = std::log2(static_cast<double>(n));
  result.rate.resize(ues);
  result.shannon_term.resize(ues);
  result.detection_penalty.resize(ues);
  result.p_c.resize(ues);

  const Eigen::VectorXd sigma = sinr.sigma_sq();
  for (int k = 0; k < ues; ++k) {
    const double s2 = sigma(k);
    const double pc = detection_probability(n, s2);
    const double penalty = xlog2x(pc) + xlog2x(1.0 - pc) - (1.0 - pc) * std::log2(n - 1.0);
    result.shannon_term(k) = std::log2(1.0 + n / s2);
    result.p_c(k) = pc;
    result.detection_penalty(k) = penalty;
    result.rate(k) = tf * (result.shannon_term(k) + result.index_term + penalty);
  }
  result.sum_rate = result.rate.sum();
  return result;
}

SeResult se_single_antenna(const SystemParams& params, const SinrProfile& sinr) {
  params.validate();
  if (params.ue_antennas != 1) {
    throw ConfigError("single-antenna baseline requires N = 1");
  }
  check_profile(sinr, params);

  const int ues = params.ues_per_cell;
  const double tf = params.time_fraction();

  SeResult result;
  result.time_fraction = tf;
  result.index_term = 0.0;
  result.rate.resize(ues);
  result.shannon_term.resize(ues);
  result.detection_penalty = Eigen::VectorXd::Zero(ues);
  result.p_c = Eigen::VectorXd::Ones(ues);

  const Eigen::VectorXd sigma = sinr.sigma_sq();
  for (int k = 0; k < ues; ++k) {
    result.shannon_term(k) = std::log2(1.0 + 1.0 / sigma(k));
    result.rate(k) = tf * result.shannon_term(k);
  }
  result.sum_rate = result.rate.sum();
  return result;
}

SeResult spectral_efficiency(const SystemParams& params, const SinrProfile& sinr) {
  return params.ue_antennas == 1 ? se_single_antenna(params, sinr)
                                 : se_lower_bound_fixed(params, sinr);
}

namespace {

struct MuSums {
  // Per UE k of the home cell: contamination power and first-order sums over
  // the pilot-sharing set (home cell included via mu = 1).
  Eigen::VectorXd pilot_sq;    // sum over cochannel cells of mu^2
  Eigen::VectorXd pilot_one;   // 1 + sum over cochannel cells of mu
  Eigen::VectorXd cross_one;   // sum over pilot-sharing cells, other UEs
  Eigen::VectorXd outside_one; // sum over non-pilot-sharing cells, all UEs
  double all_cells_all_ues = 0.0;
};

MuSums mu_sums(const SystemParams& params, const AttenuationProfile& atten,
               const CellLayout& layout) {
  const int ues = params.ues_per_cell;
  const int cells = layout.cell_count();
  MuSums s;
  s.pilot_sq = Eigen::VectorXd::Zero(ues);
  s.pilot_one = Eigen::VectorXd::Ones(ues);  // home cell contributes mu = 1
  s.cross_one = Eigen::VectorXd::Zero(ues);
  s.outside_one = Eigen::VectorXd::Zero(ues);

  for (int k = 0; k < ues; ++k) {
    for (int j : layout.cochannel) {
      const double mu = atten.mu(j, k);
      s.pilot_sq(k) += mu * mu;
      s.pilot_one(k) += mu;
    }
  }

  double shared_total = 0.0;   // all UEs of all pilot-sharing cells (home included)
  double outside_total = 0.0;  // all UEs of the remaining cells
  for (int j = 0; j < cells; ++j) {
    double cell_total = 0.0;
    for (int k2 = 0; k2 < ues; ++k2) cell_total += atten.mu(j, k2);
    (layout.shares_pilots(j) ? shared_total : outside_total) += cell_total;
  }
  s.all_cells_all_ues = shared_total + outside_total;
  s.outside_one.setConstant(outside_total);
  // Cross-UE term counts pilot-sharing UEs other than k itself.
  for (int k = 0; k < ues; ++k) s.cross_one(k) = shared_total - s.pilot_one(k);
  return s;
}

}  // namespace

SinrProfile inv_sinr_mr_fixed(const SystemParams& params, const AttenuationProfile& atten,
                              const TxCorrelation& corr, const CellLayout& layout) {
  SystemParams p = params;
  p.combiner = Combiner::MR;
  p.validate();
  const MuSums s = mu_sums(p, atten, layout);
  const double eps = corr.eps_s;
  const double n_over_m = static_cast<double>(p.ue_antennas) / p.bs_antennas;
  const double inv_snr = 1.0 / p.snr_eff;
  const double pilot_noise = inv_snr / (p.reuse_factor * p.ues_per_cell);

  SinrProfile out;
  out.provenance = SinrSource::ClosedFormFixed;
  out.inv_sinr.resize(p.ues_per_cell, p.ue_antennas);
  for (int k = 0; k < p.ues_per_cell; ++k) {
    const double value = (1.0 + eps) * s.pilot_sq(k) + eps +
                         n_over_m * (pilot_noise + s.pilot_one(k)) *
                             (inv_snr + s.all_cells_all_ues);
    out.inv_sinr.row(k).setConstant(value);
  }
  return out;
}

SinrProfile inv_sinr_zf_fixed(const SystemParams& params, const AttenuationProfile& atten,
                              const TxCorrelation& corr, const CellLayout& layout) {
  SystemParams p = params;
  p.combiner = Combiner::ZF;
  p.validate();
  const int nk = p.ue_antennas * p.ues_per_cell;
  const MuSums s = mu_sums(p, atten, layout);
  const double inv_snr = 1.0 / p.snr_eff;
  const double theta = p.theta();
  const double scale = static_cast<double>(p.ue_antennas) / (p.bs_antennas - nk);

  SinrProfile out;
  out.provenance = SinrSource::ClosedFormFixed;
  out.inv_sinr.resize(p.ues_per_cell, p.ue_antennas);
  for (int k = 0; k < p.ues_per_cell; ++k) {
    const double inner = s.pilot_one(k) + theta * s.cross_one(k) + s.outside_one(k) + inv_snr;
    for (int n = 0; n < p.ue_antennas; ++n) {
      out.inv_sinr(k, n) = s.pilot_sq(k) + corr.r_diag(n) * scale * s.pilot_one(k) * inner;
    }
  }
  return out;
}

SinrProfile inv_sinr_fixed(const SystemParams& params, const AttenuationProfile& atten,
                           const TxCorrelation& corr, const CellLayout& layout) {
  return params.combiner == Combiner::MR ? inv_sinr_mr_fixed(params, atten, corr, layout)
                                         : inv_sinr_zf_fixed(params, atten, corr, layout);
}

SinrProfile inv_sinr_fixed_limit(const SystemParams& params, const AttenuationProfile& atten,
                                 const TxCorrelation& corr, const CellLayout& layout) {
  const MuSums s = mu_sums(params, atten, layout);
  SinrProfile out;
  out.provenance = SinrSource::ClosedFormFixed;
  out.inv_sinr.resize(params.ues_per_cell, params.ue_antennas);
  for (int k = 0; k < params.ues_per_cell; ++k) {
    const double value = params.combiner == Combiner::MR
                             ? (1.0 + corr.eps_s) * s.pilot_sq(k) + corr.eps_s
                             : s.pilot_sq(k);
    out.inv_sinr.row(k).setConstant(value);
  }
  return out;
}

namespace {

struct MomentSums {
  double pilot_sq = 0.0;     // sum over cochannel cells of second moments
  double pilot_one = 1.0;    // 1 + sum over cochannel cells of first moments
  double outside_one = 0.0;  // sum over remaining neighbor cells of first moments
  double all_one = 0.0;      // sum over all cells of first moments
  double pilot_var = 0.0;    // sum over cochannel cells of variances
};

MomentSums moment_sums(const InterferenceMoments& moments, const CellLayout& layout) {
  MomentSums s;
  for (int j : layout.cochannel) {
    s.pilot_sq += moments.mu_bar2(j);
    s.pilot_one += moments.mu_bar1(j);
    s.pilot_var += moments.mu_var(j);
  }
  for (int j = 0; j < layout.cell_count(); ++j) {
    s.all_one += moments.mu_bar1(j);
    if (!layout.shares_pilots(j)) s.outside_one += moments.mu_bar1(j);
  }
  return s;
}

}  // namespace

SinrProfile inv_sinr_random(const SystemParams& params, const InterferenceMoments& moments,
                            const TxCorrelation& corr, const CellLayout& layout,
                            bool include_variance) {
  SystemParams p = params;
  p.validate();
  if (moments.mu_bar1.size() != layout.cell_count()) {
    throw ConfigError("moment set does not cover the layout");
  }
  const MomentSums s = moment_sums(moments, layout);
  const double inv_snr = 1.0 / p.snr_eff;
  const int n_ant = p.ue_antennas;
  const int k_ues = p.ues_per_cell;

  SinrProfile out;
  out.provenance = SinrSource::ClosedFormRandom;
  out.inv_sinr.resize(k_ues, n_ant);

  if (p.combiner == Combiner::MR) {
    const double n_over_m = static_cast<double>(n_ant) / p.bs_antennas;
    double value = (1.0 + corr.eps_s) * s.pilot_sq + corr.eps_s +
                   n_over_m * (inv_snr / (p.reuse_factor * k_ues) + s.pilot_one) *
                       (inv_snr + k_ues * s.all_one);
    if (include_variance) value += n_over_m * s.pilot_var;
    out.inv_sinr.setConstant(value);
  } else {
    const int nk = n_ant * k_ues;
    const double scale = static_cast<double>(n_ant) / (p.bs_antennas - nk);
    const double inner =
        s.pilot_one + (k_ues - 1) * p.theta() * s.pilot_one + k_ues * s.outside_one + inv_snr;
    for (int n = 0; n < n_ant; ++n) {
      double value = s.pilot_sq + corr.r_diag(n) * scale * s.pilot_one * inner;
      if (include_variance) value += corr.r_diag(n) * scale * s.pilot_var;
      out.inv_sinr.col(n).setConstant(value);
    }
  }
  return out;
}

SinrProfile inv_sinr_random_limit(const SystemParams& params, const InterferenceMoments& moments,
                                  const TxCorrelation& corr, const CellLayout& layout) {
  const MomentSums s = moment_sums(moments, layout);
  SinrProfile out;
  out.provenance = SinrSource::ClosedFormRandom;
  out.inv_sinr.resize(params.ues_per_cell, params.ue_antennas);
  const double value = params.combiner == Combiner::MR
                           ? (1.0 + corr.eps_s) * s.pilot_sq + corr.eps_s
                           : s.pilot_sq;
  out.inv_sinr.setConstant(value);
  return out;
}

SeResult se_random_lb(const SystemParams& params, const InterferenceMoments& moments,
                      const TxCorrelation& corr, const CellLayout& layout,
                      bool include_variance) {
  const SinrProfile chi = inv_sinr_random(params, moments, corr, layout, include_variance);
  return spectral_efficiency(params, chi);
}

}  // namespace smmimo
