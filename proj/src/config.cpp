#include "smmimo/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace smmimo {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  }
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
}

bool parse_flag(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"system.m", [](const ExperimentConfig& c) { return std::to_string(c.m); },
       [](ExperimentConfig& c, const std::string& v) { c.m = static_cast<int>(parse_long("system.m", v)); }},
      {"system.n", [](const ExperimentConfig& c) { return std::to_string(c.n); },
       [](ExperimentConfig& c, const std::string& v) { c.n = static_cast<int>(parse_long("system.n", v)); }},
      {"system.k", [](const ExperimentConfig& c) { return std::to_string(c.k); },
       [](ExperimentConfig& c, const std::string& v) { c.k = static_cast<int>(parse_long("system.k", v)); }},
      {"system.t", [](const ExperimentConfig& c) { return std::to_string(c.t); },
       [](ExperimentConfig& c, const std::string& v) { c.t = static_cast<int>(parse_long("system.t", v)); }},
      {"system.omega", [](const ExperimentConfig& c) { return std::to_string(c.omega); },
       [](ExperimentConfig& c, const std::string& v) { c.omega = static_cast<int>(parse_long("system.omega", v)); }},
      {"system.snr_db", [](const ExperimentConfig& c) { return format_double(c.snr_db); },
       [](ExperimentConfig& c, const std::string& v) { c.snr_db = parse_number("system.snr_db", v); }},
      {"system.combiner", [](const ExperimentConfig& c) { return c.combiner; },
       [](ExperimentConfig& c, const std::string& v) {
         if (v != "mr" && v != "zf" && v != "both") {
           throw ConfigError("system.combiner must be mr, zf or both");
         }
         c.combiner = v;
       }},
      {"system.theta", [](const ExperimentConfig& c) { return format_double(c.theta); },
       [](ExperimentConfig& c, const std::string& v) { c.theta = parse_number("system.theta", v); }},
      {"system.include_variance",
       [](const ExperimentConfig& c) { return std::string(c.include_variance ? "true" : "false"); },
       [](ExperimentConfig& c, const std::string& v) {
         c.include_variance = parse_flag("system.include_variance", v);
       }},
      {"geometry.r_c", [](const ExperimentConfig& c) { return format_double(c.r_c); },
       [](ExperimentConfig& c, const std::string& v) { c.r_c = parse_number("geometry.r_c", v); }},
      {"geometry.r_min", [](const ExperimentConfig& c) { return format_double(c.r_min); },
       [](ExperimentConfig& c, const std::string& v) { c.r_min = parse_number("geometry.r_min", v); }},
      {"geometry.alpha", [](const ExperimentConfig& c) { return format_double(c.alpha); },
       [](ExperimentConfig& c, const std::string& v) { c.alpha = parse_number("geometry.alpha", v); }},
      {"geometry.placement", [](const ExperimentConfig& c) { return c.placement; },
       [](ExperimentConfig& c, const std::string& v) {
         if (v != "uniform" && v != "fixed-ring") {
           throw ConfigError("geometry.placement must be uniform or fixed-ring");
         }
         c.placement = v;
       }},
      {"geometry.ring_radius", [](const ExperimentConfig& c) { return format_double(c.ring_radius); },
       [](ExperimentConfig& c, const std::string& v) {
         c.ring_radius = parse_number("geometry.ring_radius", v);
       }},
      {"correlation.lambda_mm", [](const ExperimentConfig& c) { return format_double(c.lambda_mm); },
       [](ExperimentConfig& c, const std::string& v) {
         c.lambda_mm = parse_number("correlation.lambda_mm", v);
       }},
      {"correlation.d_m_mm", [](const ExperimentConfig& c) { return format_double(c.d_m_mm); },
       [](ExperimentConfig& c, const std::string& v) {
         c.d_m_mm = parse_number("correlation.d_m_mm", v);
       }},
      {"correlation.spacing", [](const ExperimentConfig& c) { return c.spacing; },
       [](ExperimentConfig& c, const std::string& v) {
         if (v != "max" && v != "optimized") {
           throw ConfigError("correlation.spacing must be max or optimized");
         }
         c.spacing = v;
       }},
      {"correlation.grid_points", [](const ExperimentConfig& c) { return std::to_string(c.grid_points); },
       [](ExperimentConfig& c, const std::string& v) {
         c.grid_points = static_cast<int>(parse_long("correlation.grid_points", v));
       }},
      {"montecarlo.sinr_draws", [](const ExperimentConfig& c) { return std::to_string(c.sinr_draws); },
       [](ExperimentConfig& c, const std::string& v) {
         c.sinr_draws = parse_long("montecarlo.sinr_draws", v);
       }},
      {"montecarlo.mi_samples", [](const ExperimentConfig& c) { return std::to_string(c.mi_samples); },
       [](ExperimentConfig& c, const std::string& v) {
         c.mi_samples = parse_long("montecarlo.mi_samples", v);
       }},
      {"montecarlo.detection_trials",
       [](const ExperimentConfig& c) { return std::to_string(c.detection_trials); },
       [](ExperimentConfig& c, const std::string& v) {
         c.detection_trials = parse_long("montecarlo.detection_trials", v);
       }},
      {"montecarlo.moment_samples",
       [](const ExperimentConfig& c) { return std::to_string(c.moment_samples); },
       [](ExperimentConfig& c, const std::string& v) {
         c.moment_samples = parse_long("montecarlo.moment_samples", v);
       }},
      {"montecarlo.placement_draws",
       [](const ExperimentConfig& c) { return std::to_string(c.placement_draws); },
       [](ExperimentConfig& c, const std::string& v) {
         c.placement_draws = parse_long("montecarlo.placement_draws", v);
       }},
      {"sweep.jobs", [](const ExperimentConfig& c) { return c.jobs; },
       [](ExperimentConfig& c, const std::string& v) { c.jobs = v; }},
      {"sweep.omegas", [](const ExperimentConfig& c) { return c.omegas; },
       [](ExperimentConfig& c, const std::string& v) { c.omegas = v; }},
      {"sweep.candidate_n", [](const ExperimentConfig& c) { return c.candidate_n; },
       [](ExperimentConfig& c, const std::string& v) { c.candidate_n = v; }},
      {"tightness.m_values", [](const ExperimentConfig& c) { return c.m_values; },
       [](ExperimentConfig& c, const std::string& v) { c.m_values = v; }},
      {"run.seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
       [](ExperimentConfig& c, const std::string& v) {
         try {
           c.seed = std::stoull(v);
         } catch (const std::exception&) {
           throw ConfigError("run.seed must be an unsigned integer");
         }
       }},
      {"run.threads", [](const ExperimentConfig& c) { return std::to_string(c.threads); },
       [](ExperimentConfig& c, const std::string& v) {
         c.threads = static_cast<int>(parse_long("run.threads", v));
       }},
      {"run.out_dir", [](const ExperimentConfig& c) { return c.out_dir; },
       [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; }},
      {"run.cache_dir", [](const ExperimentConfig& c) { return c.cache_dir; },
       [](ExperimentConfig& c, const std::string& v) { c.cache_dir = v; }},
  };
  return table;
}

const Field& find_field(const std::string& key) {
  for (const Field& f : fields()) {
    if (key == f.key) return f;
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  find_field(key).set(*this, trim(value));
}

std::string ExperimentConfig::get(const std::string& key) const {
  return find_field(key).get(*this);
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(fields().size());
  for (const Field& f : fields()) out.emplace_back(f.key, f.get(*this));
  return out;
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : entries()) {
    const std::string sec = key.substr(0, key.find('.'));
    if (sec != section) {
      if (!section.empty()) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << key.substr(key.find('.') + 1) << " = " << value << "\n";
  }
  return out.str();
}

namespace {

void apply_text(ExperimentConfig& config, std::istream& in) {
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header: " + line);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.find('.') == std::string::npos && !section.empty()) key = section + "." + key;
    config.set(key, value);
  }
}

}  // namespace

void ExperimentConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  apply_text(*this, in);
}

void ExperimentConfig::apply_overrides(const std::vector<std::string>& key_value_pairs) {
  for (const std::string& kv : key_value_pairs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  apply_text(config, in);
  return config;
}

double ExperimentConfig::snr_linear() const { return std::pow(10.0, snr_db / 10.0); }

SystemParams ExperimentConfig::system_params(Combiner comb) const {
  SystemParams p;
  p.bs_antennas = m;
  p.ue_antennas = n;
  p.ues_per_cell = k;
  p.frame_symbols = t;
  p.reuse_factor = omega;
  p.snr_eff = snr_linear();
  p.combiner = comb;
  p.theta_override = theta;
  return p;
}

std::vector<Combiner> ExperimentConfig::combiners() const {
  if (combiner == "mr") return {Combiner::MR};
  if (combiner == "zf") return {Combiner::ZF};
  return {Combiner::MR, Combiner::ZF};
}

PlacementMode ExperimentConfig::placement_mode() const {
  return placement == "fixed-ring" ? PlacementMode::FixedRing : PlacementMode::UniformRandom;
}

SpacingPolicy ExperimentConfig::spacing_policy() const {
  return spacing == "optimized" ? SpacingPolicy::Optimized : SpacingPolicy::MaxSpread;
}

std::vector<int> ExperimentConfig::candidate_n_list() const {
  std::vector<int> out;
  for (double v : parse_value_list(candidate_n)) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<int> ExperimentConfig::omega_list() const {
  if (trim(omegas).empty()) return {omega};
  std::vector<int> out;
  for (double v : parse_value_list(omegas)) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<SweepJob> ExperimentConfig::sweep_jobs() const {
  std::vector<SweepJob> out;
  if (trim(jobs).empty()) return out;
  for (const std::string& part : split(jobs, ';')) {
    if (part.empty()) continue;
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("sweep.jobs entries must look like axis:v1,v2,... got '" + part + "'");
    }
    SweepJob job;
    job.axis = trim(part.substr(0, colon));
    job.values = parse_value_list(part.substr(colon + 1));
    out.push_back(std::move(job));
  }
  return out;
}

std::vector<int> ExperimentConfig::tightness_m_values() const {
  std::vector<int> out;
  for (double v : parse_value_list(m_values)) out.push_back(static_cast<int>(v));
  return out;
}

std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split(text, ',')) {
    if (item.empty()) continue;
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_number("values", item));
      continue;
    }
    const double lo = parse_number("values", trim(item.substr(0, dots)));
    std::string rest = trim(item.substr(dots + 2));
    double hi = 0.0;
    double step = 0.0;
    double factor = 2.0;  // bare a..b doubles
    bool geometric = true;
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      std::string spec = trim(rest.substr(colon + 1));
      rest = trim(rest.substr(0, colon));
      if (!spec.empty() && (spec.front() == 'x' || spec.front() == 'X')) {
        factor = parse_number("values", spec.substr(1));
        if (!(factor > 1.0)) throw ConfigError("geometric range factor must exceed 1");
      } else {
        geometric = false;
        step = parse_number("values", spec);
        if (!(step > 0.0)) throw ConfigError("range step must be positive");
      }
    }
    hi = parse_number("values", rest);
    if (hi < lo) throw ConfigError("range upper bound below lower bound");
    if (geometric) {
      if (!(lo > 0.0)) throw ConfigError("geometric range needs a positive start");
      for (double v = lo; v <= hi * (1.0 + 1e-12); v *= factor) out.push_back(v);
    } else {
      for (double v = lo; v <= hi + step * 1e-9; v += step) out.push_back(v);
    }
  }
  if (out.empty()) throw ConfigError("empty value list");
  return out;
}

namespace {

ExperimentConfig with(const std::vector<std::pair<std::string, std::string>>& deltas) {
  ExperimentConfig c;
  for (const auto& [key, value] : deltas) c.set(key, value);
  return c;
}

}  // namespace

Preset preset(const std::string& id) {
  // Tightness checks of the two closed forms.
  if (id == "fig4") {
    return {"tightness", with({{"geometry.placement", "fixed-ring"},
                               {"tightness.m_values", "128,256,512"}})};
  }
  if (id == "fig5") {
    return {"tightness", with({{"geometry.placement", "uniform"},
                               {"tightness.m_values", "128,256,512,1024"}})};
  }
  // Per-N rate curves against M for the two reuse factors (ZF).
  if (id == "fig6") {
    return {"sweep", with({{"system.combiner", "zf"},
                           {"correlation.d_m_mm", "1000"},
                           {"sweep.omegas", "1"},
                           {"sweep.jobs", "M:32,48,64,70,96,128,140,192,256,320,400,512,768,1024"}})};
  }
  if (id == "fig7") {
    return {"sweep",
            with({{"system.combiner", "zf"},
                  {"correlation.d_m_mm", "1000"},
                  {"sweep.omegas", "3"},
                  {"sweep.jobs", "M:32,48,64,80,100,110,120,130,140,160,200,256,384,512,768,1024"}})};
  }
  // Optimal N against the number of users.
  if (id == "fig8") {
    return {"sweep", with({{"correlation.d_m_mm", "1000"},
                           {"sweep.omegas", "1,3"},
                           {"sweep.jobs", "K:1,2,5,10,15,20,25,30,35,40,45,50"}})};
  }
  // Optimal N against frame length and against device size.
  if (id == "fig9") {
    return {"sweep", with({{"sweep.omegas", "1,3"},
                           {"sweep.jobs",
                            "T:10,20,50,100,200,500,1000,2000;D_m:10,20,50,100,200,500,1000"}})};
  }
  // N-optimized rate against the baseline, per parameter.
  if (id == "fig10") {
    return {"sweep", with({{"correlation.d_m_mm", "1000"},
                           {"sweep.omegas", "1,3"},
                           {"sweep.jobs", "M:32,64,128,256,512,1024"}})};
  }
  if (id == "fig11" || id == "fig12") {
    // fig11 reads the per-cell column, fig12 the per-UE column of the same grid.
    return {"sweep", with({{"correlation.d_m_mm", "1000"},
                           {"sweep.omegas", "1,3"},
                           {"sweep.jobs", "K:1,2,5,10,15,20,25,30,35,40,45,50"}})};
  }
  if (id == "fig13") {
    return {"sweep", with({{"correlation.d_m_mm", "1000"},
                           {"sweep.omegas", "1,3"},
                           {"sweep.jobs", "T:10,20,50,100,200,500,1000,2000"}})};
  }
  if (id == "fig14") {
    return {"sweep", with({{"sweep.omegas", "1,3"},
                           {"sweep.jobs", "D_m:10,20,50,100,200,300,500,700,1000"}})};
  }
  throw ConfigError("unknown preset '" + id + "'");
}

std::vector<std::string> preset_ids() {
  return {"fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13",
          "fig14"};
}

}  // namespace smmimo
