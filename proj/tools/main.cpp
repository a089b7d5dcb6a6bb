#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smmimo/config.hpp"
#include "smmimo/csv.hpp"
#include "smmimo/sweep.hpp"

namespace fs = std::filesystem;
using namespace smmimo;

namespace {

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::string preset_id;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = -1;
  std::string combiner_flag;
  long draws_flag = 0;
  std::string axis_flag;
  std::string values_flag;
};

void add_common_options(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Configuration file (key = value, [section] headers)");
  cmd->add_option("--set", flags.sets, "Override a config key, e.g. --set system.m=256")
      ->take_all();
  cmd->add_option("--out", flags.out_dir, "Output directory (default: $SMMIMO_OUT_DIR or .)");
  cmd->add_option("--seed", flags.seed, "Master seed")->each([&flags](const std::string&) {
    flags.seed_given = true;
  });
  cmd->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--preset", flags.preset_id,
                  "Experiment preset (fig4..fig14); applied before --config/--set");
}

ExperimentConfig resolve_config(const CommonFlags& flags) {
  ExperimentConfig config;
  if (!flags.preset_id.empty()) config = preset(flags.preset_id).config;
  if (!flags.config_path.empty()) config.apply_file(flags.config_path);
  config.apply_overrides(flags.sets);
  if (flags.seed_given) config.seed = flags.seed;
  if (flags.threads >= 0) config.threads = flags.threads;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (!flags.combiner_flag.empty()) config.set("system.combiner", flags.combiner_flag);
  return config;
}

int effective_threads(const ExperimentConfig& config) {
  if (config.threads > 0) return config.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

fs::path effective_out_dir(const ExperimentConfig& config) {
  if (!config.out_dir.empty()) return config.out_dir;
  if (const char* env = std::getenv("SMMIMO_OUT_DIR"); env && *env) return env;
  return ".";
}

std::string effective_cache_dir(const ExperimentConfig& config, const fs::path& out_dir) {
  if (!config.cache_dir.empty()) return config.cache_dir;
  return (out_dir / "moments_cache").string();
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const ExperimentConfig& config, int threads, double wall_seconds,
                    const std::vector<std::string>& outputs) {
  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["csv_schema_version"] = 1;
  manifest["command"] = command;
  manifest["code_version"] = kVersion;
  manifest["seed"] = config.seed;
  manifest["threads"] = threads;
  manifest["wall_time_s"] = wall_seconds;
  manifest["outputs"] = outputs;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [key, value] : config.entries()) cfg[key] = value;
  manifest["config"] = cfg;
  std::ofstream out(out_dir / (command + "_manifest.json"));
  out << manifest.dump(2) << "\n";
}

InterferenceMoments moments_for(const ExperimentConfig& config, const CellLayout& layout,
                                const fs::path& out_dir, int threads) {
  MomentSpec spec;
  spec.cell_radius = config.r_c;
  spec.path_loss_exponent = config.alpha;
  spec.min_distance = config.r_min;
  spec.samples = config.moment_samples;
  spec.seed = config.seed;
  return cached_moments(effective_cache_dir(config, out_dir), layout, spec, threads);
}

// ---- subcommand bodies ----

int run_bounds(const ExperimentConfig& config, const fs::path& out_dir, int threads,
               std::vector<std::string>& outputs) {
  const CellLayout layout = build_layout(config.r_c, config.omega);
  const TxCorrelation corr = correlation_for_device(config.n, config.d_m_mm, config.lambda_mm,
                                                    config.spacing_policy(), config.grid_points);
  const bool fixed = config.placement_mode() == PlacementMode::FixedRing;

  std::ofstream file(out_dir / "bounds.csv");
  CsvWriter csv(file, {"mode", "combiner", "m", "n", "k", "t", "omega", "snr_db", "d_m_mm",
                       "spacing_mm", "eps_s", "chi_sq", "p_c", "time_fraction", "shannon_term",
                       "index_term", "detection_penalty", "per_ue_rate", "sum_rate"});

  NetworkScenario scenario;
  InterferenceMoments moments;
  if (fixed) {
    scenario = make_scenario(layout, config.k, PlacementMode::FixedRing, config.ring_radius,
                             config.r_min, config.alpha, config.seed);
  } else {
    moments = moments_for(config, layout, out_dir, threads);
  }

  for (Combiner comb : config.combiners()) {
    const SystemParams params = config.system_params(comb);
    const SinrProfile profile =
        fixed ? inv_sinr_fixed(params, scenario.atten, corr, layout)
              : inv_sinr_random(params, moments, corr, layout, config.include_variance);
    const SeResult se = spectral_efficiency(params, profile);
    csv.field(fixed ? "fixed" : "random")
        .field(to_string(comb))
        .field(params.bs_antennas)
        .field(params.ue_antennas)
        .field(params.ues_per_cell)
        .field(params.frame_symbols)
        .field(params.reuse_factor)
        .field(config.snr_db)
        .field(config.d_m_mm)
        .field(corr.spacing_mm)
        .field(corr.eps_s)
        .field(profile.sigma_sq().mean())
        .field(se.p_c.mean())
        .field(se.time_fraction)
        .field(se.shannon_term.mean())
        .field(se.index_term)
        .field(se.detection_penalty.mean())
        .field(se.rate.mean())
        .field(se.sum_rate);
    csv.end_row();
  }
  outputs.push_back("bounds.csv");
  return 0;
}

int run_moments(const ExperimentConfig& config, const fs::path& out_dir, int threads,
                std::vector<std::string>& outputs) {
  const CellLayout layout = build_layout(config.r_c, config.omega);
  const InterferenceMoments moments = moments_for(config, layout, out_dir, threads);

  std::ofstream file(out_dir / "moments.csv");
  CsvWriter csv(file, {"cell", "axial_u", "axial_v", "reuse_group", "shares_pilots",
                       "distance_m", "mu_bar1", "mu_bar1_se", "mu_bar2", "mu_bar2_se", "mu_var",
                       "samples", "seed"});
  for (int j = 0; j < layout.cell_count(); ++j) {
    csv.field(j)
        .field(layout.axial_u[j])
        .field(layout.axial_v[j])
        .field(layout.reuse_group[j])
        .field(layout.shares_pilots(j))
        .field(layout.centers[j].norm())
        .field(moments.mu_bar1(j))
        .field(moments.se1(j))
        .field(moments.mu_bar2(j))
        .field(moments.se2(j))
        .field(moments.mu_var(j))
        .field(moments.sample_count)
        .field(static_cast<long>(config.seed));
    csv.end_row();
  }
  outputs.push_back("moments.csv");
  return 0;
}

int run_simulate(const ExperimentConfig& config, const fs::path& out_dir, int threads,
                 std::vector<std::string>& outputs) {
  const CellLayout layout = build_layout(config.r_c, config.omega);
  const TxCorrelation corr = correlation_for_device(config.n, config.d_m_mm, config.lambda_mm,
                                                    config.spacing_policy(), config.grid_points);
  const NetworkScenario scenario =
      make_scenario(layout, config.k, config.placement_mode(), config.ring_radius, config.r_min,
                    config.alpha, config.seed);

  std::ofstream file(out_dir / "simulate.csv");
  CsvWriter csv(file, {"combiner", "ue", "antenna", "inv_sinr_mc", "inv_sinr_mc_se",
                       "inv_sinr_closed", "rel_gap", "draws"});
  for (Combiner comb : config.combiners()) {
    const SystemParams params = config.system_params(comb);
    const SinrProfile mc =
        sinr_lemma1(params, scenario, corr, comb, config.sinr_draws, config.seed, threads);
    const SinrProfile closed = inv_sinr_fixed(params, scenario.atten, corr, layout);
    for (int k = 0; k < params.ues_per_cell; ++k) {
      for (int a = 0; a < params.ue_antennas; ++a) {
        const double gap = (mc.inv_sinr(k, a) - closed.inv_sinr(k, a)) / closed.inv_sinr(k, a);
        csv.field(to_string(comb))
            .field(k)
            .field(a)
            .field(mc.inv_sinr(k, a))
            .field(mc.inv_sinr_se(k, a))
            .field(closed.inv_sinr(k, a))
            .field(gap)
            .field(config.sinr_draws);
        csv.end_row();
      }
    }
  }
  outputs.push_back("simulate.csv");
  return 0;
}

int run_tightness(const ExperimentConfig& config, const fs::path& out_dir, int threads,
                  long draws_override, std::vector<std::string>& outputs) {
  const CellLayout layout = build_layout(config.r_c, config.omega);
  const TxCorrelation corr = correlation_for_device(config.n, config.d_m_mm, config.lambda_mm,
                                                    config.spacing_policy(), config.grid_points);
  const SystemParams base = config.system_params(config.combiners().front());
  const std::vector<int> m_values = config.tightness_m_values();

  std::vector<TightnessRow> rows;
  if (config.placement_mode() == PlacementMode::FixedRing) {
    const NetworkScenario scenario =
        make_scenario(layout, config.k, PlacementMode::FixedRing, config.ring_radius,
                      config.r_min, config.alpha, config.seed);
    const long draws = draws_override > 0 ? draws_override : config.sinr_draws;
    rows = tightness_fixed(base, scenario, corr, m_values, config.combiners(), draws,
                           config.mi_samples, config.seed, threads);
  } else {
    const InterferenceMoments moments = moments_for(config, layout, out_dir, threads);
    const long draws = draws_override > 0 ? draws_override : config.placement_draws;
    rows = tightness_random(base, layout, moments, corr, m_values, config.combiners(), draws,
                            config.alpha, config.r_min, config.seed, threads);
  }

  std::ofstream file(out_dir / "tightness.csv");
  CsvWriter csv(file, {"mode", "combiner", "m", "bound_sum_rate", "sim_sum_rate", "sim_se",
                       "abs_gap", "rel_gap", "draws", "mi_samples"});
  for (const TightnessRow& row : rows) {
    csv.field(row.mode)
        .field(to_string(row.combiner))
        .field(row.bs_antennas)
        .field(row.bound_sum_rate)
        .field(row.sim_sum_rate)
        .field(row.sim_se)
        .field(row.abs_gap)
        .field(row.rel_gap)
        .field(row.draws)
        .field(row.mi_samples);
    csv.end_row();
  }
  outputs.push_back("tightness.csv");
  return 0;
}

int run_sweep(const ExperimentConfig& config, const fs::path& out_dir, int threads,
              const std::string& axis_flag, const std::string& values_flag,
              std::vector<std::string>& outputs) {
  std::vector<SweepJob> jobs;
  if (!axis_flag.empty()) {
    if (values_flag.empty()) throw ConfigError("--axis requires --values");
    jobs.push_back({axis_flag, parse_value_list(values_flag)});
  } else {
    jobs = config.sweep_jobs();
  }
  if (jobs.empty()) throw ConfigError("no sweep axis given (use --axis/--values or sweep.jobs)");

  const CellLayout layout = build_layout(config.r_c, config.omega);
  const InterferenceMoments moments = moments_for(config, layout, out_dir, threads);

  std::ofstream file(out_dir / "sweep.csv");
  CsvWriter csv(file, {"axis", "value", "omega", "combiner", "n", "feasible", "reason",
                       "per_ue_rate", "sum_rate", "is_n_star"});
  for (const SweepJob& job : jobs) {
    SweepGrid grid;
    grid.axis = job.axis;
    grid.values = job.values;
    grid.omegas = config.omega_list();
    grid.base = config.system_params(config.combiners().front());
    grid.candidate_n = config.candidate_n_list();
    grid.combiners = config.combiners();
    grid.device_size_mm = config.d_m_mm;
    grid.wavelength_mm = config.lambda_mm;
    grid.spacing = config.spacing_policy();
    grid.spacing_grid_points = config.grid_points;
    grid.include_variance = config.include_variance;

    const SweepResult result = evaluate_grid(grid, moments, config.r_c);
    for (const SweepRow& row : result.rows) {
      csv.field(row.axis)
          .field(row.value)
          .field(row.omega)
          .field(to_string(row.combiner))
          .field(row.ue_antennas)
          .field(row.feasible)
          .field(row.reason)
          .field(row.per_ue_rate)
          .field(row.sum_rate)
          .field(row.is_n_star);
      csv.end_row();
    }
  }
  outputs.push_back("sweep.csv");
  return 0;
}

int run_optimize_n(const ExperimentConfig& config, const fs::path& out_dir, int threads,
                   std::vector<std::string>& outputs) {
  const CellLayout layout = build_layout(config.r_c, config.omega);
  const InterferenceMoments moments = moments_for(config, layout, out_dir, threads);

  std::ofstream file(out_dir / "optimize_n.csv");
  CsvWriter csv(file,
                {"combiner", "n", "feasible", "reason", "per_ue_rate", "sum_rate", "is_n_star"});
  for (Combiner comb : config.combiners()) {
    const OptimizeNResult result =
        optimize_n(config.system_params(comb), moments, config.r_c, config.candidate_n_list(),
                   config.d_m_mm, config.lambda_mm, config.spacing_policy(),
                   config.include_variance);
    for (const SweepRow& row : result.table) {
      csv.field(to_string(row.combiner))
          .field(row.ue_antennas)
          .field(row.feasible)
          .field(row.reason)
          .field(row.per_ue_rate)
          .field(row.sum_rate)
          .field(row.is_n_star);
      csv.end_row();
    }
  }
  outputs.push_back("optimize_n.csv");
  return 0;
}

int run_optimize_spacing(const ExperimentConfig& config, const fs::path& out_dir,
                         std::vector<std::string>& outputs) {
  const SpacingResult result =
      optimize_spacing(config.n, config.d_m_mm, config.lambda_mm, config.grid_points);
  std::ofstream file(out_dir / "optimize_spacing.csv");
  CsvWriter csv(file, {"n", "lambda_mm", "d_m_mm", "ds_max_mm", "ds_star_mm", "eps_s_star",
                       "grid_points"});
  csv.field(config.n)
      .field(config.lambda_mm)
      .field(config.d_m_mm)
      .field(config.d_m_mm / (config.n - 1))
      .field(result.spacing_mm)
      .field(result.eps_s)
      .field(config.grid_points);
  csv.end_row();
  outputs.push_back("optimize_spacing.csv");
  return 0;
}

int dispatch(const std::string& command, CommonFlags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig config = resolve_config(flags);
  const fs::path out_dir = effective_out_dir(config);
  fs::create_directories(out_dir);
  const int threads = effective_threads(config);

  std::vector<std::string> outputs;
  int rc = 0;
  if (command == "bounds") {
    rc = run_bounds(config, out_dir, threads, outputs);
  } else if (command == "moments") {
    rc = run_moments(config, out_dir, threads, outputs);
  } else if (command == "simulate") {
    rc = run_simulate(config, out_dir, threads, outputs);
  } else if (command == "tightness") {
    rc = run_tightness(config, out_dir, threads, flags.draws_flag, outputs);
  } else if (command == "sweep") {
    rc = run_sweep(config, out_dir, threads, flags.axis_flag, flags.values_flag, outputs);
  } else if (command == "optimize-n") {
    rc = run_optimize_n(config, out_dir, threads, outputs);
  } else if (command == "optimize-spacing") {
    rc = run_optimize_spacing(config, out_dir, outputs);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(out_dir, command, config, threads, wall, outputs);
  for (const std::string& f : outputs) std::cout << (out_dir / f).string() << "\n";
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cell massive SM-MIMO uplink spectral-efficiency analyzer"};
  app.require_subcommand(1);

  CommonFlags flags;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"bounds", "Closed-form SE lower bounds at the configured operating point"},
      {"simulate", "Monte-Carlo SINR estimates against the closed forms"},
      {"tightness", "Bound-vs-simulation comparison table across M"},
      {"sweep", "Parameter sweeps with per-N rates and the optimal N"},
      {"optimize-n", "Per-N rate table and the optimal N at one operating point"},
      {"optimize-spacing", "Antenna-spacing search minimizing the correlation objective"},
      {"moments", "Spatial interference moments of the UE distribution"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common_options(cmd, flags);
    if (name == "tightness") {
      cmd->add_option("--combiner", flags.combiner_flag, "mr, zf or both");
      cmd->add_option("--draws", flags.draws_flag, "Override the simulation draw budget");
    }
    if (name == "sweep") {
      cmd->add_option("--axis", flags.axis_flag, "Sweep axis (M, K, T, omega, N, snr_eff, D_m)");
      cmd->add_option("--values", flags.values_flag,
                      "Grid values: list 'a,b,c', doubling 'a..b', linear 'a..b:s', geometric 'a..b:xF'");
    }
  }

  try {
    app.parse(argc, argv);
    return dispatch(app.get_subcommands().front()->get_name(), flags);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
