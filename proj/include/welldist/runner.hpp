#pragma once

#include "welldist/core.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace welldist {

/// Flat experiment configuration. Text form: one `key = value` per line,
/// dotted section prefixes, `#` comments; unknown keys are rejected.
struct ExperimentConfig {
  std::string experiment = "sigma";
  int d = 2;
  double q = 16.0;
  double s = 1.0;
  std::uint64_t seed = 0;

  std::string set_kind = "lattice";
  std::string set_shape = "ball";
  double set_jitter = 0.0;
  std::string measure_variant = "standard";
  double measure_rho = 0.5;
  std::string body = "ball";

  double t_min = 16.0;
  double t_max = 256.0;
  int per_octave = 4;

  double quad_oversample = 4.0;
  double quad_tol = 1e-6;
  long long quad_m_max = 1LL << 25;
  std::string quad_evaluator = "automatic";

  double c1 = 0.25;
  double C2 = 4.0;
  int eta_order = 8;
  double eta_scale = 1.0;
  double tau_step = 0.25;
  double eta_floor = 1e-6;

  std::vector<double> caps_t;  // empty: q^2
  std::vector<double> lattice_tau{4.0, 16.0, 64.0, 256.0};
  double lattice_eps = 0.0;
  std::vector<double> distances_delta;  // empty: 0 and 1/q
  std::vector<double> incidences_tau{5.0};
  double incidences_eps = 0.0;
  double single_tau = 0.5;
  double single_lo = 0.0;  // 0: q^2
  double single_hi = 0.0;  // 0: 2 q^2
  bool single_resample = true;
  std::string report_in;  // empty: the output directory

  bool operator==(const ExperimentConfig&) const = default;
};

/// Every key in serialization order.
const std::vector<std::string>& config_keys();
const std::vector<std::string>& experiment_names();

/// Sets one key from its text value; ConfigError on unknown keys or values.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);

/// Parses the key=value text; all problems are reported in one ConfigError.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
std::string serialize_config(const ExperimentConfig& cfg);
/// Reads a key=value file or a manifest.json written by a previous run.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
/// Range checks across all keys; throws ConfigError listing every offender.
void validate_config(const ExperimentConfig& cfg);

struct RunSummary {
  std::vector<std::string> files;  // written, relative to the output directory
  std::vector<std::string> lines;  // human-readable results
};

/// Runs cfg.experiment, writing its CSVs and manifest.json into out_dir only.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// 17 significant digits, "%.17g".
std::string format_number(double v);

}  // namespace welldist
