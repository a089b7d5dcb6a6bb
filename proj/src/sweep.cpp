#include "smmimo/sweep.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

#include <json.hpp>

namespace smmimo {
namespace {

void apply_axis(SystemParams& p, double& device_mm, const std::string& axis, double value) {
  if (axis == "M") {
    p.bs_antennas = static_cast<int>(value);
  } else if (axis == "K") {
    p.ues_per_cell = static_cast<int>(value);
  } else if (axis == "T") {
    p.frame_symbols = static_cast<int>(value);
  } else if (axis == "omega") {
    p.reuse_factor = static_cast<int>(value);
  } else if (axis == "N") {
    p.ue_antennas = static_cast<int>(value);
  } else if (axis == "snr_eff") {
    p.snr_eff = value;
  } else if (axis == "D_m") {
    device_mm = value;
  } else {
    throw ConfigError("unknown sweep axis '" + axis +
                      "' (allowed: M, K, T, omega, N, snr_eff, D_m)");
  }
}

std::string feasibility_reason(const SystemParams& p) {
  if (p.pilot_symbols() >= p.frame_symbols) return "pilot overhead B >= T";
  if (p.combiner == Combiner::ZF && p.bs_antennas <= p.ue_antennas * p.ues_per_cell) {
    return "M <= N*K";
  }
  return {};
}

// Correlation matrices are reused across the grid; only (N, D_m) matter.
// Degenerate (N, D_m) pairs are cached as absent: tightly packed arrays fail
// the positive-definiteness gate and their grid rows become infeasible data.
class CorrCache {
 public:
  CorrCache(double wavelength_mm, SpacingPolicy policy, int grid_points)
      : wavelength_mm_(wavelength_mm), policy_(policy), grid_points_(grid_points) {}

  const TxCorrelation* get(int n, double device_mm) {
    const auto key = std::make_pair(n, device_mm);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      std::optional<TxCorrelation> corr;
      try {
        corr = correlation_for_device(n, device_mm, wavelength_mm_, policy_, grid_points_);
      } catch (const NumericalError&) {
      }
      it = cache_.emplace(key, std::move(corr)).first;
    }
    return it->second ? &*it->second : nullptr;
  }

 private:
  double wavelength_mm_;
  SpacingPolicy policy_;
  int grid_points_;
  std::map<std::pair<int, double>, std::optional<TxCorrelation>> cache_;
};

}  // namespace

SweepResult evaluate_grid(const SweepGrid& grid, const InterferenceMoments& moments,
                          double cell_radius) {
  if (grid.values.empty()) throw ConfigError("sweep grid has no values");
  for (int n : grid.candidate_n) {
    if (n != 1 && (n <= 0 || (n & (n - 1)) != 0)) {
      throw ConfigError("candidate N values must be 1 or powers of two");
    }
  }
  std::vector<int> omegas = grid.omegas;
  if (omegas.empty()) omegas.push_back(grid.base.reuse_factor);

  CorrCache corr_cache(grid.wavelength_mm, grid.spacing, grid.spacing_grid_points);
  std::map<int, CellLayout> layouts;
  for (int w : omegas) layouts.emplace(w, build_layout(cell_radius, w));
  if (grid.axis == "omega") {
    for (double v : grid.values) {
      const int w = static_cast<int>(v);
      if (!layouts.count(w)) layouts.emplace(w, build_layout(cell_radius, w));
    }
  }

  SweepResult result;
  for (double value : grid.values) {
    for (int omega : omegas) {
      for (Combiner comb : grid.combiners) {
        const std::size_t first_row = result.rows.size();
        for (int n : grid.candidate_n) {
          SystemParams p = grid.base;
          p.reuse_factor = omega;
          p.combiner = comb;
          p.ue_antennas = n;
          double device_mm = grid.device_size_mm;
          apply_axis(p, device_mm, grid.axis, value);
          if (grid.axis == "N" && p.ue_antennas != n) continue;  // axis pins N itself

          SweepRow row;
          row.axis = grid.axis;
          row.value = value;
          row.omega = p.reuse_factor;
          row.combiner = comb;
          row.ue_antennas = p.ue_antennas;
          row.reason = feasibility_reason(p);
          row.feasible = row.reason.empty();
          const TxCorrelation* corr =
              row.feasible ? corr_cache.get(p.ue_antennas, device_mm) : nullptr;
          if (row.feasible && corr == nullptr) {
            row.feasible = false;
            row.reason = "degenerate correlation";
          }
          if (row.feasible) {
            const CellLayout& layout = layouts.at(p.reuse_factor);
            const SeResult se =
                se_random_lb(p, moments, *corr, layout, grid.include_variance);
            row.per_ue_rate = se.rate(0);
            row.sum_rate = se.sum_rate;
          }
          result.rows.push_back(std::move(row));
        }
        // Argmax over the feasible candidates; ties go to the smaller N.
        std::size_t best = result.rows.size();
        for (std::size_t i = first_row; i < result.rows.size(); ++i) {
          const SweepRow& r = result.rows[i];
          if (!r.feasible) continue;
          if (best == result.rows.size() || r.sum_rate > result.rows[best].sum_rate) best = i;
        }
        if (best != result.rows.size()) result.rows[best].is_n_star = true;
      }
    }
  }
  return result;
}

OptimizeNResult optimize_n(const SystemParams& params, const InterferenceMoments& moments,
                           double cell_radius, const std::vector<int>& candidate_n,
                           double device_size_mm, double wavelength_mm, SpacingPolicy spacing,
                           bool include_variance) {
  SweepGrid grid;
  grid.axis = "M";
  grid.values = {static_cast<double>(params.bs_antennas)};
  grid.base = params;
  grid.candidate_n = candidate_n;
  grid.combiners = {params.combiner};
  grid.device_size_mm = device_size_mm;
  grid.wavelength_mm = wavelength_mm;
  grid.spacing = spacing;
  grid.include_variance = include_variance;

  OptimizeNResult out;
  out.table = evaluate_grid(grid, moments, cell_radius).rows;
  for (const SweepRow& row : out.table) {
    if (row.is_n_star) out.n_star = row.ue_antennas;
  }
  return out;
}

std::vector<TightnessRow> tightness_fixed(const SystemParams& base,
                                          const NetworkScenario& scenario,
                                          const TxCorrelation& corr,
                                          const std::vector<int>& m_values,
                                          const std::vector<Combiner>& combiners, long draws,
                                          long mi_samples, std::uint64_t seed, int threads) {
  std::vector<TightnessRow> rows;
  for (int m : m_values) {
    for (Combiner comb : combiners) {
      SystemParams p = base;
      p.bs_antennas = m;
      p.combiner = comb;

      const SinrProfile bound_sinr = inv_sinr_fixed(p, scenario.atten, corr, scenario.layout);
      const SeResult bound = spectral_efficiency(p, bound_sinr);

      const SinrProfile mc_sinr =
          sinr_lemma1(p, scenario, corr, comb, draws, seed, threads, false);
      const MiResult sim = mutual_information(p, mc_sinr, mi_samples, seed, threads);

      TightnessRow row;
      row.mode = "fixed";
      row.combiner = comb;
      row.bs_antennas = m;
      row.bound_sum_rate = bound.sum_rate;
      row.sim_sum_rate = sim.sum_rate;
      row.sim_se = sim.sum_rate_se;
      row.abs_gap = sim.sum_rate - bound.sum_rate;
      row.rel_gap = row.abs_gap / bound.sum_rate;
      row.draws = draws;
      row.mi_samples = mi_samples;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<TightnessRow> tightness_random(const SystemParams& base, const CellLayout& layout,
                                           const InterferenceMoments& moments,
                                           const TxCorrelation& corr,
                                           const std::vector<int>& m_values,
                                           const std::vector<Combiner>& combiners,
                                           long placement_draws, double path_loss_exponent,
                                           double min_distance, std::uint64_t seed, int threads) {
  if (placement_draws < 2) throw ConfigError("need at least two placement draws");
  (void)threads;  // placement averaging is cheap enough to stay serial

  std::vector<TightnessRow> rows;
  std::vector<double> draw_rate(static_cast<std::size_t>(placement_draws));
  for (int m : m_values) {
    for (Combiner comb : combiners) {
      SystemParams p = base;
      p.bs_antennas = m;
      p.combiner = comb;

      const SeResult bound = se_random_lb(p, moments, corr, layout);

      for (long d = 0; d < placement_draws; ++d) {
        const NetworkScenario scen =
            make_scenario(layout, p.ues_per_cell, PlacementMode::UniformRandom, 0.0,
                          min_distance, path_loss_exponent, seed + static_cast<std::uint64_t>(d));
        const SinrProfile sinr = inv_sinr_fixed(p, scen.atten, corr, layout);
        draw_rate[static_cast<std::size_t>(d)] = spectral_efficiency(p, sinr).sum_rate;
      }
      const double n = static_cast<double>(placement_draws);
      const double mean = pairwise_sum(draw_rate.data(), draw_rate.size()) / n;
      double var = 0.0;
      for (double r : draw_rate) var += (r - mean) * (r - mean);
      var /= (n - 1.0);

      TightnessRow row;
      row.mode = "random";
      row.combiner = comb;
      row.bs_antennas = m;
      row.bound_sum_rate = bound.sum_rate;
      row.sim_sum_rate = mean;
      row.sim_se = std::sqrt(var / n);
      row.abs_gap = mean - bound.sum_rate;
      row.rel_gap = row.abs_gap / bound.sum_rate;
      row.draws = placement_draws;
      row.mi_samples = 0;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string moment_fingerprint(const MomentSpec& spec) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "rc=%.9g;alpha=%.9g;rmin=%.9g;dist=uniform;n=%ld;seed=%" PRIu64,
                spec.cell_radius, spec.path_loss_exponent, spec.min_distance, spec.samples,
                spec.seed);
  char out[32];
  std::snprintf(out, sizeof(out), "%016" PRIx64, fnv1a64(buf));
  return out;
}

InterferenceMoments cached_moments(const std::string& cache_dir, const CellLayout& layout,
                                   const MomentSpec& spec, int threads) {
  namespace fs = std::filesystem;
  const auto compute = [&] {
    return spatial_moments(layout, spec.path_loss_exponent, spec.min_distance, spec.samples,
                           spec.seed, threads);
  };
  if (cache_dir.empty()) return compute();

  fs::create_directories(cache_dir);
  const fs::path file = fs::path(cache_dir) / ("moments_" + moment_fingerprint(spec) + ".json");

  if (fs::exists(file)) {
    std::ifstream in(file);
    nlohmann::json j;
    in >> j;
    InterferenceMoments m;
    const auto vec = [&j](const char* key) {
      const auto& a = j.at(key);
      Eigen::VectorXd v(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<int>(i)) = a[i].get<double>();
      return v;
    };
    m.mu_bar1 = vec("mu_bar1");
    m.mu_bar2 = vec("mu_bar2");
    m.mu_var = vec("mu_var");
    m.se1 = vec("se1");
    m.se2 = vec("se2");
    m.sample_count = j.at("sample_count").get<long>();
    if (m.mu_bar1.size() != layout.cell_count()) {
      throw ConfigError("cached moment set does not match the layout");
    }
    return m;
  }

  const InterferenceMoments m = compute();
  nlohmann::json j;
  const auto store = [&j](const char* key, const Eigen::VectorXd& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    j[key] = out;
  };
  store("mu_bar1", m.mu_bar1);
  store("mu_bar2", m.mu_bar2);
  store("mu_var", m.mu_var);
  store("se1", m.se1);
  store("se2", m.se2);
  j["sample_count"] = m.sample_count;
  j["fingerprint_inputs"] = {{"cell_radius", spec.cell_radius},
                             {"path_loss_exponent", spec.path_loss_exponent},
                             {"min_distance", spec.min_distance},
                             {"samples", spec.samples},
                             {"seed", spec.seed}};

  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp, file);
  return m;
}

}  // namespace smmimo
