#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smmimo/bounds.hpp"
#include "smmimo/sweep.hpp"

namespace smmimo {

/// Flat key-value experiment configuration; sections group keys per module.
/// Defaults reproduce the reference operating point (M=512, N=2, K=10, T=1000,
/// omega=3, 10 dB, D_m=100 mm, lambda=60 mm, r_c=500 m, r_min=50 m, alpha=3.7).
struct ExperimentConfig {
  // [system]
  int m = 512;
  int n = 2;
  int k = 10;
  int t = 1000;
  int omega = 3;
  double snr_db = 10.0;
  std::string combiner = "both";  // mr | zf | both
  double theta = -1.0;            // negative = built-in per-omega value
  bool include_variance = false;

  // [geometry]
  double r_c = 500.0;
  double r_min = 50.0;
  double alpha = 3.7;
  std::string placement = "uniform";  // uniform | fixed-ring
  double ring_radius = 275.0;

  // [correlation]
  double lambda_mm = 60.0;
  double d_m_mm = 100.0;
  std::string spacing = "max";  // max | optimized
  int grid_points = 10000;

  // [montecarlo]
  long sinr_draws = 10000;
  long mi_samples = 100000;
  long detection_trials = 1000000;
  long moment_samples = 50000;
  long placement_draws = 50000;

  // [sweep]
  std::string jobs;                          // "axis:v1,v2,...;axis2:..."
  std::string omegas;                        // "" = system omega, else e.g. "1,3"
  std::string candidate_n = "1,2,4,8,16";

  // [tightness]
  std::string m_values = "128,256,512";

  // [run]
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  std::string out_dir;
  std::string cache_dir;

  void set(const std::string& key, const std::string& value);  // throws on unknown key
  std::string get(const std::string& key) const;
  void apply_file(const std::string& path);
  void apply_overrides(const std::vector<std::string>& key_value_pairs);  // "key=value"

  /// All keys with their current values, in the fixed serialization order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string serialize() const;
  static ExperimentConfig parse(const std::string& text);

  double snr_linear() const;
  SystemParams system_params(Combiner comb) const;
  std::vector<Combiner> combiners() const;
  PlacementMode placement_mode() const;
  SpacingPolicy spacing_policy() const;
  std::vector<int> candidate_n_list() const;
  std::vector<int> omega_list() const;        // empty config string -> {omega}
  std::vector<SweepJob> sweep_jobs() const;   // from `jobs`
  std::vector<int> tightness_m_values() const;
};

/// Numeric grid notation: "1,2,5", "64..1024" (doubling), "10..50:5" (linear
/// step), "16..256:x4" (geometric factor).
std::vector<double> parse_value_list(const std::string& text);

/// Experiment presets mirroring the headline result tables; each returns a
/// fully resolved config and the subcommand it is meant for.
struct Preset {
  std::string command;
  ExperimentConfig config;
};
Preset preset(const std::string& id);
std::vector<std::string> preset_ids();

}  // namespace smmimo
