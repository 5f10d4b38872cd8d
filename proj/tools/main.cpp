#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mbnla/errors.hpp"

// Exit codes: 0 success, 2 parameter error, 3 numeric/model error, 4 I/O.

namespace {

int run(int argc, char** argv) {
  CLI::App app{
      "mbnla: simulate two-mode EPR measurement records, apply "
      "measurement-based noiseless linear amplification, and evaluate "
      "entanglement criteria and secret key rates"};
  app.require_subcommand(1);

  using namespace mbnla::cli;

  SimulateArgs sim;
  auto* simulate = app.add_subcommand(
      "simulate", "generate a measurement record from a configured state");
  simulate->add_option("--config", sim.config_path, "experiment config JSON");
  simulate->add_option("--tmsv-r", sim.tmsv_r,
                       "two-mode squeezing parameter (quick state setup)");
  simulate->add_option("--v-sq", sim.v_sq, "squeezed variance, SNU");
  simulate->add_option("--v-anti", sim.v_anti, "anti-squeezed variance, SNU");
  simulate->add_option("--loss-t", sim.loss_t,
                       "append a loss channel with this transmissivity");
  simulate->add_option("--loss-nth", sim.loss_n_thermal,
                       "thermal photons of the appended loss channel");
  simulate->add_option("--loss-mode", sim.loss_mode, "A or B")
      ->check(CLI::IsMember({"A", "B"}));
  simulate->add_option("--shots", sim.shots, "number of shots");
  simulate->add_option("--seed", sim.seed, "sampling seed");
  simulate->add_option("--out", sim.out, "output record path")->required();
  simulate->add_option("--csv", sim.csv_out, "also export the record as CSV");

  FilterArgs filt;
  auto* filter = app.add_subcommand(
      "filter", "post-select a record with the truncated amplifier filter");
  filter->add_option("record", filt.record_path, "input record")->required();
  filter->add_option("--gain", filt.gain, "amplifier gain (>= 1)")->required();
  filter->add_option("--cutoff-sd", filt.cutoff_sd,
                     "cutoff width in standard deviations");
  filter->add_option("--seed", filt.seed,
                     "acceptance seed (default: record seed)");
  filter->add_option("--out", filt.out, "output record path")->required();
  filter->add_option("--summary", filt.summary_path,
                     "machine-readable summary path");

  AnalyzeArgs crit;
  auto* criteria = app.add_subcommand(
      "criteria", "reconstruct the covariance matrix and evaluate the "
                  "entanglement criteria");
  criteria->add_option("record", crit.record_path, "input record")->required();
  criteria->add_option("--out", crit.out_prefix, "report prefix")->required();
  criteria->add_option("--boot", crit.n_boot, "bootstrap resamples");
  criteria->add_option("--seed", crit.seed,
                       "bootstrap seed (default: record seed)");

  AnalyzeArgs key;
  auto* keyrate =
      app.add_subcommand("keyrate", "secret key rate of a record");
  keyrate->add_option("record", key.record_path, "input record")->required();
  keyrate->add_option("--out", key.out_prefix, "report prefix")->required();
  keyrate->add_option("--beta", key.beta_rec, "reconciliation efficiency");
  keyrate->add_option("--boot", key.n_boot, "bootstrap resamples");
  keyrate->add_option("--seed", key.seed,
                      "bootstrap seed (default: record seed)");

  AnalyzeArgs norm;
  auto* normality = app.add_subcommand(
      "normality", "moment and Jarque-Bera diagnostics per stream");
  normality->add_option("record", norm.record_path, "input record")
      ->required();
  normality->add_option("--out", norm.out_prefix, "report prefix")->required();

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "run the configured gain/loss sweeps into figure tables");
  sweep_cmd->add_option("--config", sweep.config_path, "experiment config")
      ->required();
  sweep_cmd->add_option("--out", sweep.out_dir, "output directory")
      ->required();
  sweep_cmd->add_option("--seed", sweep.seed, "override the config seed");
  sweep_cmd->add_option("--shots", sweep.shots, "override the config shots");
  sweep_cmd->add_option("--mode", sweep.mode, "monte-carlo or analytic")
      ->check(CLI::IsMember({"monte-carlo", "analytic"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (simulate->parsed()) return cmd_simulate(sim);
  if (filter->parsed()) return cmd_filter(filt);
  if (criteria->parsed()) return cmd_criteria(crit);
  if (keyrate->parsed()) return cmd_keyrate(key);
  if (normality->parsed()) return cmd_normality(norm);
  if (sweep_cmd->parsed()) return cmd_sweep(sweep);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mbnla::invalid_parameter_error& e) {
    std::cerr << "mbnla: parameter error: " << e.what() << "\n";
    return 2;
  } catch (const mbnla::unphysical_state_error& e) {
    std::cerr << "mbnla: parameter error: " << e.what() << "\n";
    return 2;
  } catch (const mbnla::io_error& e) {
    std::cerr << "mbnla: i/o error: " << e.what() << "\n";
    return 4;
  } catch (const mbnla::numeric_error& e) {
    std::cerr << "mbnla: numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "mbnla: error: " << e.what() << "\n";
    return 3;
  }
}
