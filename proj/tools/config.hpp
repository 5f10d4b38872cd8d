#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mbnla/gaussian.hpp"

namespace mbnla::cli {

// One experiment = source state, channel list, acquisition size/seed, filter
// sweep, analyses. Loaded from a single JSON file; every report embeds the
// resolved form for provenance.

struct ChannelSpec {
  Mode mode = Mode::B;
  double transmissivity = 1.0;
  double n_thermal = 0.0;
};

struct StateSpec {
  std::string type = "tmsv";  // tmsv | squeezers | cm
  double r = 0.0;
  double v_sq = 1.0, v_anti = 1.0;
  Eigen::Matrix4d cm_snu = Eigen::Matrix4d::Identity();
  std::string label = "custom";
};

struct ExperimentConfig {
  StateSpec state;
  std::vector<ChannelSpec> channels;
  uint64_t shots = 1000000;
  uint64_t seed = 1;
  std::vector<double> gains{1.1, 1.2, 1.3, 1.4};
  double cutoff_sd = 4.5;
  uint64_t filter_seed = 1;
  std::vector<std::string> analyses{"criteria", "keyrate", "normality"};
  double beta_rec = 0.98;
  int n_boot = 500;
  uint64_t boot_seed = 2;
  std::vector<double> fig4_transmissivities;
  std::string mode = "monte-carlo";  // or "analytic"
};

ExperimentConfig load_config(const std::string& path);

/// The configured source state after its channel list.
GaussianState<double> resolve_state(const ExperimentConfig& config);

/// Resolved config as JSON for embedding into reports. Contains no output
/// paths, so reports stay byte-identical across output locations.
nlohmann::json config_to_json(const ExperimentConfig& config);

bool wants_analysis(const ExperimentConfig& config, const std::string& name);

}  // namespace mbnla::cli
