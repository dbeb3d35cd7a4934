#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stefan/control.hpp"
#include "stefan/synthesis.hpp"
#include "stefan/types.hpp"

namespace stefan {

/// Flat key/value configuration with dotted section names, e.g.
///   domain.sigma = 10
///   region.kind = tilted_band
/// Unknown keys are rejected; environment variables of the form
/// STEFANCTL_DOMAIN_SIGMA override file values.
struct ExperimentConfig {
  DomainConfig domain;
  GridSpec grid;
  ControlRegion region;

  std::string initial = "fig_hum";  ///< preset id or single_mode
  int mode_n = 3, mode_k = 1;       ///< single_mode parameters

  Backend backend = Backend::kkt;
  double tolerance = 1e-6;

  LrOptions lr;
  double lr_window_c = -0.5, lr_window_d = 0.2;

  double obs_n = 1.0;
  int obs_K = 16;
  double obs_t_min = 0.05, obs_t_max = 0.5;
  int obs_points = 6;
  double window_c = -0.5, window_d = 0.2;

  double series_c = 0.0, series_d = 0.5;
  int series_terms = 10000;

  int spectrum_n_max = 50;
  int spectrum_K = 20;

  std::string output_dir = "out";
  unsigned long long seed = 12345;

  /// Build the initial state from the `initial` field.
  State make_initial() const;

  void validate() const;  ///< throws with a field-level message
};

/// Parse from file text (pass empty for defaults), then apply environment
/// overrides, then the caller's command-line overrides.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
void apply_env_overrides(ExperimentConfig& cfg);
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Round-trip: the full key/value listing of a config (documented schema).
std::string config_schema_text(const ExperimentConfig& cfg);

}  // namespace stefan
