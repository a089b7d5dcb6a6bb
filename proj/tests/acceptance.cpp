// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Budgets are sized for a laptop-class machine.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "smmimo/config.hpp"
#include "smmimo/montecarlo.hpp"
#include "smmimo/sweep.hpp"

using namespace smmimo;

namespace {

int g_threads = 2;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  explicit Check(std::string context) : context_(std::move(context)) {}

  void require(bool ok, const std::string& what) {
    ++total_;
    if (!ok) {
      ++failed_;
      if (!first_failure_.empty()) return;
      first_failure_ = what;
    }
  }

  Outcome outcome(const std::string& summary) const {
    Outcome out;
    out.pass = failed_ == 0;
    std::ostringstream ss;
    ss << summary << " (" << (total_ - failed_) << "/" << total_ << " checks";
    if (failed_ > 0) ss << "; first failure: " << first_failure_;
    ss << ")";
    out.detail = ss.str();
    return out;
  }

 private:
  std::string context_;
  int total_ = 0;
  int failed_ = 0;
  std::string first_failure_;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

SystemParams table_params(Combiner comb) {
  SystemParams p;
  p.bs_antennas = 512;
  p.ue_antennas = 2;
  p.ues_per_cell = 10;
  p.frame_symbols = 1000;
  p.reuse_factor = 3;
  p.snr_eff = 10.0;
  p.combiner = comb;
  return p;
}

const CellLayout& layout_omega3() {
  static const CellLayout layout = build_layout(500.0, 3);
  return layout;
}

// Production moment budget, shared across criteria 6 and 8.
const InterferenceMoments& table_moments() {
  static const InterferenceMoments m =
      spatial_moments(layout_omega3(), 3.7, 50.0, 50000, 1, g_threads);
  return m;
}

// ---- criterion 1: detection probability closed form vs brute force ----

Outcome criterion1() {
  Check check("detection");
  for (int n : {2, 4, 8, 16}) {
    for (double s : {0.1, 1.0, 4.0, 16.0, 100.0}) {
      const double closed = detection_probability(n, s);
      const McEstimate oracle = detection_pc_oracle(n, s, 1000000, 1234, g_threads);
      const double gap = std::abs(closed - oracle.value);
      check.require(gap <= 3.0 * oracle.std_error,
                    "N=" + std::to_string(n) + " sigma2=" + fmt(s) + " gap=" + fmt(gap) +
                        " > 3se=" + fmt(3 * oracle.std_error));
    }
  }
  check.require(detection_probability(2, 2.0) == 2.0 / 3.0, "P_c(2,2) != 2/3 exactly");
  return check.outcome("closed form within 3 binomial SEs at 1e6 trials on all 20 points");
}

// ---- criterion 2: large-M limits, Theta(1/M) approach ----

Outcome criterion2() {
  Check check("limits");
  // Strong-contamination operating point so the relative gap target at M=1e9
  // is meaningful for both combiners: reuse 1, UEs on a 450 m ring.
  const CellLayout layout = build_layout(500.0, 1);
  const NetworkScenario scen =
      make_scenario(layout, 10, PlacementMode::FixedRing, 450.0, 50.0, 3.7, 2);
  const TxCorrelation corr = jakes_matrix(2, 100.0, 60.0);

  for (Combiner comb : {Combiner::MR, Combiner::ZF}) {
    SystemParams p = table_params(comb);
    p.reuse_factor = 1;
    const SinrProfile limit = inv_sinr_fixed_limit(p, scen.atten, corr, layout);

    double prev = 0.0;
    for (int e = 12; e <= 20; ++e) {
      p.bs_antennas = 1 << e;
      const SinrProfile at_m = inv_sinr_fixed(p, scen.atten, corr, layout);
      const double gap = (at_m.inv_sinr - limit.inv_sinr).cwiseAbs().maxCoeff();
      if (prev > 0.0) {
        const double ratio = prev / gap;
        check.require(ratio >= 1.8 && ratio <= 2.2,
                      std::string(to_string(comb)) + " gap ratio " + fmt(ratio) +
                          " outside [1.8, 2.2] at M=2^" + std::to_string(e));
      }
      prev = gap;
    }
    p.bs_antennas = 1000000000;
    const SinrProfile at_m = inv_sinr_fixed(p, scen.atten, corr, layout);
    const double rel =
        ((at_m.inv_sinr - limit.inv_sinr).cwiseQuotient(limit.inv_sinr)).cwiseAbs().maxCoeff();
    check.require(rel < 1e-6, std::string(to_string(comb)) + " relative gap at M=1e9 is " +
                                  fmt(rel) + " >= 1e-6");
  }
  return check.outcome("1/M approach to the pilot-contamination limits verified");
}

// ---- criteria 3 and 4: fixed-location bound tightness ----

Outcome tightness_criterion(Combiner comb, double rel_tol, bool one_sided) {
  Check check("tightness");
  const NetworkScenario scen =
      make_scenario(layout_omega3(), 10, PlacementMode::FixedRing, 275.0, 50.0, 3.7, 3);
  const TxCorrelation corr = jakes_matrix(2, 100.0, 60.0);
  const auto rows = tightness_fixed(table_params(comb), scen, corr, {128, 256, 512}, {comb},
                                    10000, 100000, 42, g_threads);
  std::ostringstream gaps;
  for (const TightnessRow& row : rows) {
    gaps << " M=" << row.bs_antennas << ":" << fmt(100 * row.rel_gap) << "%";
    check.require(std::abs(row.rel_gap) <= rel_tol,
                  "M=" + std::to_string(row.bs_antennas) + " |rel gap| " + fmt(row.rel_gap) +
                      " > " + fmt(rel_tol));
    if (one_sided) {
      check.require(row.sim_sum_rate >= row.bound_sum_rate - 3.0 * row.sim_se,
                    "M=" + std::to_string(row.bs_antennas) + " simulated " +
                        fmt(row.sim_sum_rate) + " below bound " + fmt(row.bound_sum_rate) +
                        " - 3se");
    }
  }
  return check.outcome(std::string(to_string(comb)) + " simulated vs bound:" + gaps.str());
}

// ---- criterion 5: Jensen ordering and convexity ----

Outcome criterion5() {
  Check check("jensen");
  const CellLayout& layout = layout_omega3();
  const int scenarios = 20;
  const int k_ues = 10;

  for (int n : {2, 4, 8}) {
    const TxCorrelation corr = jakes_matrix(n, 100.0 / (n - 1), 60.0);
    // Empirical moments from exactly the scenario draws used for the rates.
    InterferenceMoments emp;
    emp.mu_bar1 = Eigen::VectorXd::Zero(19);
    emp.mu_bar2 = Eigen::VectorXd::Zero(19);
    emp.mu_var = Eigen::VectorXd::Zero(19);
    emp.se1 = emp.se2 = Eigen::VectorXd::Zero(19);
    emp.sample_count = scenarios * k_ues;

    std::vector<NetworkScenario> draws;
    draws.reserve(scenarios);
    for (int s = 0; s < scenarios; ++s) {
      draws.push_back(make_scenario(layout, k_ues, PlacementMode::UniformRandom, 0.0, 50.0, 3.7,
                                    1000 + s));
      for (int j = 0; j < 19; ++j) {
        for (int k = 0; k < k_ues; ++k) {
          const double mu = draws.back().atten.mu(j, k);
          emp.mu_bar1(j) += mu;
          emp.mu_bar2(j) += mu * mu;
        }
      }
    }
    emp.mu_bar1 /= scenarios * k_ues;
    emp.mu_bar2 /= scenarios * k_ues;
    emp.mu_bar1(0) = emp.mu_bar2(0) = 1.0;

    for (Combiner comb : {Combiner::MR, Combiner::ZF}) {
      SystemParams p = table_params(comb);
      p.ue_antennas = n;
      double mean_rate = 0.0;
      for (const NetworkScenario& scen : draws) {
        const SinrProfile sinr = inv_sinr_fixed(p, scen.atten, corr, layout);
        mean_rate += spectral_efficiency(p, sinr).rate.mean();
      }
      mean_rate /= scenarios;
      const double bound = se_random_lb(p, emp, corr, layout).rate(0);
      check.require(mean_rate >= bound - 1e-9,
                    std::string(to_string(comb)) + " N=" + std::to_string(n) +
                        ": mean per-draw rate " + fmt(mean_rate) + " < moment bound " +
                        fmt(bound));
    }
  }

  // Midpoint convexity of the rate bound in the noise variance.
  for (int n : {2, 4, 8}) {
    SystemParams p = table_params(Combiner::MR);
    p.ue_antennas = n;
    const auto rate_at = [&p, n](double sigma_sq) {
      SinrProfile s;
      s.inv_sinr = Eigen::MatrixXd::Constant(p.ues_per_cell, n, sigma_sq);
      return se_lower_bound_fixed(p, s).rate(0);
    };
    const int grid = 50;
    std::vector<double> sigma(grid);
    for (int i = 0; i < grid; ++i) {
      sigma[i] = std::pow(10.0, -3.0 + 6.0 * i / (grid - 1));
    }
    int violations = 0;
    for (int i = 0; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) {
        const double a = sigma[i], b = sigma[j];
        const double lhs = rate_at(0.5 * (a + b));
        const double rhs = 0.5 * (rate_at(a) + rate_at(b));
        if (lhs > rhs + 1e-9) ++violations;
      }
    }
    check.require(violations == 0, "N=" + std::to_string(n) + ": " +
                                       std::to_string(violations) +
                                       " midpoint-convexity violations");
  }
  return check.outcome(
      "per-draw rate mean dominates the moment bound; midpoint convexity clean on 50x50 grid");
}

// ---- criterion 6: optimal-N reproduction ----

Outcome criterion6() {
  Check check("n-star");
  const InterferenceMoments& moments = table_moments();
  const std::vector<int> candidates = {1, 2, 4, 8, 16};
  std::ostringstream note;

  // (a) ZF at M=512: K=10 and K=20.
  {
    SystemParams p = table_params(Combiner::ZF);
    const int star10 = optimize_n(p, moments, 500.0, candidates, 1000.0, 60.0).n_star;
    p.ues_per_cell = 20;
    const int star20 = optimize_n(p, moments, 500.0, candidates, 1000.0, 60.0).n_star;
    note << "K=10->N*=" << star10 << " K=20->N*=" << star20;
    check.require(star10 == 4, "K=10 expected N*=4, got " + std::to_string(star10));
    check.require(star20 == 2, "K=20 expected N*=2, got " + std::to_string(star20));
  }

  // (b) ZF, reuse 3: the 2 -> 4 switch lands within one grid step of M = 120.
  {
    const std::vector<int> m_grid = {40, 60, 80, 100, 110, 120, 130, 140, 160, 200, 256, 512};
    int transition = -1;
    int prev_star = -1;
    bool monotone_step = true;
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
      SystemParams p = table_params(Combiner::ZF);
      p.bs_antennas = m_grid[i];
      const int star = optimize_n(p, moments, 500.0, candidates, 1000.0, 60.0).n_star;
      if (star >= 4 && transition < 0) transition = m_grid[i];
      if (transition < 0 && star != 2) monotone_step = false;
      if (transition > 0 && star < 4) monotone_step = false;
      prev_star = star;
    }
    (void)prev_star;
    note << " switch@M=" << transition;
    check.require(transition >= 110 && transition <= 130,
                  "2->4 switch at M=" + std::to_string(transition) + ", expected 120 +- one step");
    check.require(monotone_step, "N* not a clean 2->4 step across the M grid");
  }

  // (c) ZF, reuse 1, M=512.
  {
    SystemParams p = table_params(Combiner::ZF);
    p.reuse_factor = 1;
    const int star = optimize_n(p, moments, 500.0, candidates, 1000.0, 60.0).n_star;
    note << " omega1@512->N*=" << star;
    check.require(star == 16, "reuse 1 at M=512 expected N*=16, got " + std::to_string(star));
  }

  // (d) ZF, reuse 3: non-increasing in K, down to 1 at K=50.
  {
    int last = 1 << 20;
    int at50 = -1;
    for (int k : {1, 2, 5, 10, 15, 20, 30, 40, 50}) {
      SystemParams p = table_params(Combiner::ZF);
      p.ues_per_cell = k;
      const int star = optimize_n(p, moments, 500.0, candidates, 1000.0, 60.0).n_star;
      check.require(star <= last,
                    "N* increased from " + std::to_string(last) + " to " + std::to_string(star) +
                        " at K=" + std::to_string(k));
      last = star;
      if (k == 50) at50 = star;
    }
    note << " K=50->N*=" << at50;
    check.require(at50 == 1, "K=50 expected N*=1, got " + std::to_string(at50));
  }
  return check.outcome(note.str());
}

// ---- criterion 7: spacing optimizer ----

Outcome criterion7() {
  Check check("spacing");
  const SpacingResult best = optimize_spacing(2, 100.0, 60.0, 10000);
  const double expected = 2.4048255577 * 60.0 / (2.0 * M_PI);
  const double step = 100.0 / 10000;
  check.require(std::abs(best.spacing_mm - expected) <= step + 1e-12,
                "spacing " + fmt(best.spacing_mm) + " not within one grid step of " +
                    fmt(expected));
  check.require(best.eps_s < 1e-6, "eps_s " + fmt(best.eps_s) + " >= 1e-6");
  return check.outcome("d_s* = " + fmt(best.spacing_mm) + " mm, eps_s* = " + fmt(best.eps_s));
}

// ---- criterion 8: ordering properties on the preset grids ----

Outcome criterion8() {
  Check check("ordering");
  const auto run_preset = [&](const std::string& id) {
    const Preset pre = preset(id);
    const ExperimentConfig& cfg = pre.config;
    std::vector<SweepResult> results;
    for (const SweepJob& job : cfg.sweep_jobs()) {
      SweepGrid grid;
      grid.axis = job.axis;
      grid.values = job.values;
      grid.omegas = cfg.omega_list();
      grid.base = cfg.system_params(Combiner::MR);
      grid.candidate_n = cfg.candidate_n_list();
      grid.combiners = cfg.combiners();
      grid.device_size_mm = cfg.d_m_mm;
      grid.wavelength_mm = cfg.lambda_mm;
      grid.spacing = cfg.spacing_policy();
      results.push_back(evaluate_grid(grid, table_moments(), cfg.r_c));
    }
    return results;
  };

  // N-optimized rate never loses to the N = 1 baseline wherever both exist.
  for (const std::string& id : {"fig10", "fig11", "fig12", "fig13", "fig14"}) {
    for (const SweepResult& result : run_preset(id)) {
      for (const SweepRow& star : result.rows) {
        if (!star.is_n_star) continue;
        for (const SweepRow& other : result.rows) {
          if (other.axis == star.axis && other.value == star.value &&
              other.omega == star.omega && other.combiner == star.combiner &&
              other.ue_antennas == 1 && other.feasible) {
            check.require(star.sum_rate >= other.sum_rate - 1e-12,
                          id + " " + star.axis + "=" + fmt(star.value) + " omega=" +
                              std::to_string(star.omega) + ": optimized " +
                              fmt(star.sum_rate) + " < baseline " + fmt(other.sum_rate));
          }
        }
      }
    }
  }

  // Lower reuse factor supports at least as many UE antennas, pointwise in K.
  {
    const std::vector<SweepResult> results = run_preset("fig8");
    for (const SweepResult& result : results) {
      for (Combiner comb : {Combiner::MR, Combiner::ZF}) {
        for (const SweepRow& row : result.rows) {
          if (!row.is_n_star || row.omega != 1 || row.combiner != comb) continue;
          for (const SweepRow& other : result.rows) {
            if (other.is_n_star && other.omega == 3 && other.combiner == comb &&
                other.value == row.value) {
              check.require(row.ue_antennas >= other.ue_antennas,
                            std::string(to_string(comb)) + " K=" + fmt(row.value) +
                                ": N*(omega=1)=" + std::to_string(row.ue_antennas) +
                                " < N*(omega=3)=" + std::to_string(other.ue_antennas));
            }
          }
        }
      }
    }
  }
  return check.outcome("argmax dominance on fig10-fig14 grids; reuse-factor ordering on fig8");
}

// ---- criterion 9: numerical hygiene ----

Outcome criterion9() {
  Check check("hygiene");
  for (double s = 1e-3; s <= 1e3 * 1.0001; s *= std::pow(10.0, 0.1)) {
    const double gap =
        std::abs(detection_probability_series(16, s) - detection_probability_integral(16, s));
    check.require(gap < 1e-9, "series/integral gap " + fmt(gap) + " at sigma2=" + fmt(s));
  }
  for (int n = 2; n <= 32; ++n) {
    const double gap = std::abs(detection_denominator(n) - 1.0 / (n - 1));
    check.require(gap < 1e-12, "denominator identity off by " + fmt(gap) + " at N=" +
                                   std::to_string(n));
  }
  // Pilot orthogonality with explicit DFT columns, B = omega*N*K.
  {
    const int omega = 3, k_ues = 10, n_ant = 2;
    const int dim = omega * k_ues;
    const double b = omega * n_ant * k_ues;
    Eigen::MatrixXcd dft(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) {
        const double phase = -2.0 * M_PI * r * c / dim;
        dft(r, c) = std::complex<double>(std::cos(phase), std::sin(phase));
      }
    }
    double worst_same = 0.0, worst_cross = 0.0;
    for (int a = 0; a < dim; ++a) {
      for (int c = 0; c < dim; ++c) {
        const std::complex<double> ip = dft.col(a).adjoint() * dft.col(c);
        if (a == c) {
          worst_same = std::max(worst_same, std::abs(ip - std::complex<double>(b / n_ant, 0)));
        } else {
          worst_cross = std::max(worst_cross, std::abs(ip));
        }
      }
    }
    check.require(worst_same < 1e-12 * dim, "same-pilot correlation off by " + fmt(worst_same));
    check.require(worst_cross < 1e-12 * dim, "cross-pilot leakage " + fmt(worst_cross));
  }
  return check.outcome("series/integral agreement, denominator identity, pilot orthogonality");
}

}  // namespace

int main() {
  const unsigned hw = std::thread::hardware_concurrency();
  g_threads = hw > 0 ? static_cast<int>(hw) : 2;

  using Entry = std::pair<std::string, std::function<Outcome()>>;
  const std::vector<Entry> criteria = {
      {"detection probability closed form vs brute force", criterion1},
      {"asymptotic limits approached at rate 1/M", criterion2},
      {"bound tightness, MR within 5%",
       [] { return tightness_criterion(Combiner::MR, 0.05, false); }},
      {"bound tightness, ZF within 15% and above bound - 3se",
       [] { return tightness_criterion(Combiner::ZF, 0.15, true); }},
      {"Jensen ordering and midpoint convexity", criterion5},
      {"optimal-N reproduction", criterion6},
      {"spacing optimizer hits the decorrelating spacing", criterion7},
      {"ordering properties on preset grids", criterion8},
      {"numerical hygiene", criterion9},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %zu: %s [%.1fs] %s\n", out.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), secs, out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
