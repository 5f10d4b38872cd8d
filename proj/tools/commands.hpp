#pragma once

#include <optional>
#include <string>

#include "config.hpp"

namespace mbnla::cli {

// Command implementations behind the CLI wiring; each returns the process
// exit code (0 on success) and throws mbnla errors for the main() dispatcher
// to map onto exit codes 2 (parameter), 3 (numeric/model), 4 (I/O).

struct SimulateArgs {
  std::optional<std::string> config_path;
  std::optional<double> tmsv_r;
  std::optional<double> v_sq, v_anti;
  std::optional<double> loss_t;
  double loss_n_thermal = 0.0;
  std::string loss_mode = "B";
  std::optional<uint64_t> shots;
  std::optional<uint64_t> seed;
  std::string out;
  std::optional<std::string> csv_out;
};

struct FilterArgs {
  std::string record_path;
  double gain = 1.0;
  double cutoff_sd = 4.5;
  std::optional<uint64_t> seed;  // defaults to the record's own seed
  std::string out;
  std::optional<std::string> summary_path;  // default: <out>.summary.json
};

struct AnalyzeArgs {
  std::string record_path;
  std::string out_prefix;
  double beta_rec = 0.98;  // keyrate only
  int n_boot = 500;
  std::optional<uint64_t> seed;  // bootstrap seed, defaults to record seed
};

struct SweepArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;   // overrides config.seed
  std::optional<uint64_t> shots;  // overrides config.shots
  std::optional<std::string> mode;
};

int cmd_simulate(const SimulateArgs& args);
int cmd_filter(const FilterArgs& args);
int cmd_criteria(const AnalyzeArgs& args);
int cmd_keyrate(const AnalyzeArgs& args);
int cmd_normality(const AnalyzeArgs& args);
int cmd_sweep(const SweepArgs& args);

}  // namespace mbnla::cli
