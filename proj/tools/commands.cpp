#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "mbnla/criteria.hpp"
#include "mbnla/nla.hpp"
#include "mbnla/qkd.hpp"
#include "mbnla/record_io.hpp"
#include "mbnla/stats.hpp"
#include "reports.hpp"

namespace mbnla::cli {

using nlohmann::json;

namespace {

constexpr uint64_t kStreamChunk = uint64_t(1) << 20;

ExperimentConfig config_for_simulate(const SimulateArgs& args) {
  ExperimentConfig config;
  if (args.config_path) {
    config = load_config(*args.config_path);
  }
  if (args.tmsv_r) {
    config.state = StateSpec{};
    config.state.type = "tmsv";
    config.state.r = *args.tmsv_r;
    config.channels.clear();
  } else if (args.v_sq || args.v_anti) {
    if (!(args.v_sq && args.v_anti)) {
      throw invalid_parameter_error(
          "--v-sq and --v-anti must be given together");
    }
    config.state = StateSpec{};
    config.state.type = "squeezers";
    config.state.v_sq = *args.v_sq;
    config.state.v_anti = *args.v_anti;
    config.channels.clear();
  } else if (!args.config_path) {
    throw invalid_parameter_error(
        "simulate needs --config, --tmsv-r, or --v-sq/--v-anti");
  }
  if (args.loss_t) {
    ChannelSpec ch;
    ch.mode = args.loss_mode == "A" ? Mode::A : Mode::B;
    ch.transmissivity = *args.loss_t;
    ch.n_thermal = args.loss_n_thermal;
    config.channels.push_back(ch);
  }
  if (args.shots) config.shots = *args.shots;
  if (args.seed) config.seed = *args.seed;
  return config;
}

json filter_summary_json(const FilterOutcome& outcome, const FilterSpec& spec,
                         double cutoff_sd, uint64_t seed) {
  return json{{"gain", spec.gain},
              {"alpha_c", spec.alpha_c},
              {"cutoff_sd", cutoff_sd},
              {"filter_seed", seed},
              {"n_in", outcome.n_in},
              {"n_accept", outcome.n_accept},
              {"p_success", outcome.p_success}};
}

uint64_t default_seed(const std::optional<uint64_t>& flag,
                      const RecordMeta& meta) {
  return flag ? *flag : meta.seed;
}

}  // namespace

int cmd_simulate(const SimulateArgs& args) {
  if (args.out.empty()) {
    throw invalid_parameter_error("simulate needs --out RECORD_PATH");
  }
  const ExperimentConfig config = config_for_simulate(args);
  const GaussianState<double> state = resolve_state(config);

  RecordMeta meta;
  meta.state_label = state.label;
  meta.state_digest = state_digest(state);
  meta.seed = config.seed;
  meta.n_requested = config.shots;

  RecordWriter writer(args.out, meta);
  sample_shots_chunked(state, config.shots, config.seed, kStreamChunk,
                       [&](const MeasurementRecord& chunk) {
                         writer.append(chunk);
                       });
  writer.close();

  if (args.csv_out) {
    write_record_csv(read_record(args.out), *args.csv_out);
  }

  std::cout << "simulated state=\"" << state.label
            << "\" shots=" << config.shots << " seed=" << config.seed
            << " -> " << args.out << "\n";
  return 0;
}

int cmd_filter(const FilterArgs& args) {
  if (args.out.empty()) {
    throw invalid_parameter_error("filter needs --out RECORD_PATH");
  }
  const MeasurementRecord record = read_record(args.record_path);
  if (record.filtered()) {
    throw invalid_parameter_error(
        "input record already filtered (gain " +
        std::to_string(record.meta.gain) + "); filtering does not compose");
  }
  const uint64_t seed = default_seed(args.seed, record.meta);
  const FilterSpec spec{args.gain,
                        choose_cutoff(record, args.cutoff_sd)};

  const std::string summary_path =
      args.summary_path ? *args.summary_path : args.out + ".summary.json";
  try {
    const FilterOutcome outcome = apply_mbnla(record, spec, seed);
    write_record(outcome.record, args.out);

    const json summary =
        filter_summary_json(outcome, spec, args.cutoff_sd, seed);
    std::ofstream sum(summary_path, std::ios::trunc);
    if (!sum) throw io_error("cannot write filter summary: " + summary_path);
    sum << summary.dump(2) << "\n";

    std::cout << "filtered gain=" << spec.gain << " alpha_c=" << spec.alpha_c
              << " accepted " << outcome.n_accept << "/" << outcome.n_in
              << " (p_success=" << outcome.p_success << ") -> " << args.out
              << "\n";
    return 0;
  } catch (const empty_ensemble_error& e) {
    // Still report the acceptance estimate before failing.
    std::cout << "filtered gain=" << spec.gain << " accepted 0/"
              << record.size() << " (p_success_estimate="
              << e.p_success_estimate << ")\n";
    throw;
  }
}

int cmd_criteria(const AnalyzeArgs& args) {
  const MeasurementRecord record = read_record(args.record_path);
  BootstrapOptions options;
  options.n_boot = args.n_boot;
  options.seed = default_seed(args.seed, record.meta);
  const CriteriaReport report = criteria_report(record, options);

  json config{{"command", "criteria"},
              {"n_boot", options.n_boot},
              {"bootstrap_seed", options.seed}};
  write_report(args.out_prefix, "criteria", config,
               record_provenance(record.meta, record.size()),
               criteria_to_json(report), criteria_rows(report));
  std::cout << "criteria e_direct=" << report.e_direct.value
            << " e_reverse=" << report.e_reverse.value
            << " duan_i=" << report.duan_i.value << " -> " << args.out_prefix
            << ".{json,csv}\n";
  return 0;
}

int cmd_keyrate(const AnalyzeArgs& args) {
  const MeasurementRecord record = read_record(args.record_path);
  BootstrapOptions options;
  options.n_boot = args.n_boot;
  options.seed = default_seed(args.seed, record.meta);

  const CmEstimate est = reconstruct_cm(record);
  const KeyRateReport report =
      key_rate(est.cm, args.beta_rec, record.meta.gain);
  const BootstrapSummary k_boot = bootstrap_moments(
      record,
      [&](const RecordMoments& m) {
        Eigen::VectorXd v(1);
        v(0) = key_rate(reconstruct_cm_from_moments(m), args.beta_rec,
                        record.meta.gain)
                   .k;
        return v;
      },
      options);

  json config{{"command", "keyrate"},
              {"beta_rec", args.beta_rec},
              {"n_boot", options.n_boot},
              {"bootstrap_seed", options.seed}};
  write_report(args.out_prefix, "keyrate", config,
               record_provenance(record.meta, record.size()),
               keyrate_to_json(report, k_boot.se(0)),
               keyrate_rows(report, k_boot.se(0)));
  std::cout << "keyrate k=" << report.k << " i_ab=" << report.i_ab
            << " s_ae=" << report.s_ae << " -> " << args.out_prefix
            << ".{json,csv}\n";
  return 0;
}

int cmd_normality(const AnalyzeArgs& args) {
  const MeasurementRecord record = read_record(args.record_path);
  const NormalityReport report = jarque_bera(record);

  json config{{"command", "normality"}, {"confidence", report.confidence}};
  write_report(args.out_prefix, "normality", config,
               record_provenance(record.meta, record.size()),
               normality_to_json(report), normality_rows(report));
  std::cout << "normality all_pass=" << (report.all_pass ? "yes" : "no")
            << " -> " << args.out_prefix << ".{json,csv}\n";
  return 0;
}

namespace {

// fig3 analogue: criteria vs post-selection strength, with ideal-amplifier
// overlays; plus per-gain normality rows when requested.
void sweep_fig3(const ExperimentConfig& config,
                const GaussianState<double>& state,
                const MeasurementRecord* record, const std::string& out_dir,
                json& summary) {
  const bool monte_carlo = record != nullptr;
  // Shared cutoff sized to the largest admissible gain of the sweep.
  const double alpha_c = [&] {
    for (auto it = config.gains.rbegin(); it != config.gains.rend(); ++it) {
      try {
        return choose_cutoff_for_sweep(state, config.cutoff_sd, *it);
      } catch (const gain_exceeds_bound_error&) {
        continue;
      }
    }
    return choose_cutoff(state, config.cutoff_sd);
  }();
  summary["fig3_alpha_c"] = alpha_c;

  std::vector<std::vector<std::string>> rows;
  std::vector<std::vector<std::string>> normality;
  for (double g : config.gains) {
    std::vector<std::string> row{format_double(g)};
    std::string error;
    double p_analytic = std::numeric_limits<double>::quiet_NaN();
    double e_dir_th = p_analytic, e_rev_th = p_analytic, duan_th = p_analytic;
    try {
      p_analytic =
          analytic_success_probability(state, FilterSpec{g, alpha_c});
      const auto amplified = analytic_nla(state, g);
      const auto snu = cm_to_snu(amplified.cm);
      const auto reid = reid_epr(snu);
      e_dir_th = reid.direct;
      e_rev_th = reid.reverse;
      duan_th = duan_inseparability(snu);
    } catch (const std::exception& e) {
      error = e.what();
    }

    if (monte_carlo && error.empty()) {
      try {
        const FilterOutcome outcome =
            apply_mbnla(*record, FilterSpec{g, alpha_c}, config.filter_seed);
        BootstrapOptions boot;
        boot.n_boot = config.n_boot;
        boot.seed = config.boot_seed;
        const CriteriaReport crit = criteria_report(outcome.record, boot);
        row.insert(row.end(),
                   {format_double(outcome.p_success),
                    format_double(p_analytic),
                    format_double(crit.e_direct.value),
                    format_double(crit.e_direct.lo),
                    format_double(crit.e_direct.hi),
                    format_double(crit.e_reverse.value),
                    format_double(crit.e_reverse.lo),
                    format_double(crit.e_reverse.hi),
                    format_double(crit.duan_i.value),
                    format_double(crit.duan_i.lo),
                    format_double(crit.duan_i.hi)});
        if (wants_analysis(config, "normality")) {
          const NormalityReport norm = jarque_bera(outcome.record);
          for (const auto& s : norm.streams) {
            normality.push_back({format_double(g), s.stream,
                                 std::to_string(s.m.n),
                                 format_double(s.m.skewness),
                                 format_double(s.m.excess_kurtosis),
                                 format_double(s.jb_statistic),
                                 s.pass ? "1" : "0"});
          }
        }
      } catch (const std::exception& e) {
        error = e.what();
        row.resize(1);
        row.insert(row.end(), 11, "nan");
      }
    } else {
      row.insert(row.end(),
                 {"nan", format_double(p_analytic), "nan", "nan", "nan",
                  "nan", "nan", "nan", "nan", "nan", "nan"});
    }
    row.insert(row.end(), {format_double(e_dir_th), format_double(e_rev_th),
                           format_double(duan_th), error});
    rows.push_back(std::move(row));
  }

  write_csv(out_dir + "/fig3.csv",
            {"gain", "p_success", "p_analytic", "e_direct", "e_direct_lo",
             "e_direct_hi", "e_reverse", "e_reverse_lo", "e_reverse_hi",
             "duan_i", "duan_i_lo", "duan_i_hi", "e_direct_analytic",
             "e_reverse_analytic", "duan_i_analytic", "error"},
            rows);
  summary["fig3_rows"] = rows.size();

  if (monte_carlo && wants_analysis(config, "normality")) {
    write_csv(out_dir + "/normality.csv",
              {"gain", "stream", "n", "skewness", "excess_kurtosis",
               "jb_statistic", "pass"},
              normality);
    summary["normality_rows"] = normality.size();
  }
}

// fig4 analogue: ideal post-selected inseparability across lossy channels
// against the infinite-squeezing boundary.
void sweep_fig4(const ExperimentConfig& config,
                const std::string& out_dir, json& summary) {
  std::vector<std::vector<std::string>> rows;
  // The source before its channel list; fig4 applies its own loss sweep.
  ExperimentConfig source_only = config;
  source_only.channels.clear();
  const GaussianState<double> source = resolve_state(source_only);

  for (double t : config.fig4_transmissivities) {
    const double bound = perfect_epr_bound(t);
    for (double g : config.gains) {
      std::string error;
      double duan = std::numeric_limits<double>::quiet_NaN();
      try {
        const auto lossy = apply_loss(source, Mode::B, t);
        const auto amplified = analytic_nla(lossy, g);
        duan = duan_inseparability(cm_to_snu(amplified.cm));
      } catch (const std::exception& e) {
        error = e.what();
      }
      rows.push_back({format_double(t), format_double(g),
                      format_double(duan), format_double(bound), error});
    }
  }
  write_csv(out_dir + "/fig4.csv",
            {"transmissivity", "gain", "duan_i_analytic",
             "perfect_epr_bound", "error"},
            rows);
  summary["fig4_rows"] = rows.size();
}

// fig5 analogue: secret key rate against the amplifier gain.
void sweep_fig5(const ExperimentConfig& config,
                const GaussianState<double>& state,
                const MeasurementRecord* record, const std::string& out_dir,
                json& summary) {
  const auto analytic = keyrate_sweep(state, config.gains, config.beta_rec);

  std::vector<KeyRateEntry> mc;
  if (record) {
    MonteCarloSweepOptions options;
    options.k_sd = config.cutoff_sd;
    options.filter_seed = config.filter_seed;
    options.n_boot = config.n_boot;
    options.boot_seed = config.boot_seed;
    mc = keyrate_sweep(*record, config.gains, config.beta_rec, options);
  }

  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < config.gains.size(); ++i) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const bool have_mc = record && mc[i].error.empty();
    const double k_mc = have_mc ? mc[i].report.k : nan;
    const double k_lo = have_mc ? mc[i].k_lo : nan;
    const double k_hi = have_mc ? mc[i].k_hi : nan;
    const double k_se = have_mc ? mc[i].k_se : nan;
    const double p = have_mc ? mc[i].p_success : nan;
    const double k_th =
        analytic[i].error.empty() ? analytic[i].report.k : nan;
    std::string error = analytic[i].error;
    if (record && !mc[i].error.empty()) {
      error = error.empty() ? mc[i].error : error + " | " + mc[i].error;
    }
    rows.push_back({format_double(config.gains[i]), format_double(k_mc),
                    format_double(k_lo), format_double(k_hi),
                    format_double(k_se), format_double(p),
                    format_double(k_th), error});
  }
  write_csv(out_dir + "/fig5.csv",
            {"gain", "k", "k_lo", "k_hi", "k_se", "p_success", "k_analytic",
             "error"},
            rows);
  summary["fig5_rows"] = rows.size();
}

}  // namespace

int cmd_sweep(const SweepArgs& args) {
  ExperimentConfig config = load_config(args.config_path);
  if (args.seed) config.seed = *args.seed;
  if (args.shots) config.shots = *args.shots;
  if (args.mode) config.mode = *args.mode;
  if (config.mode != "monte-carlo" && config.mode != "analytic") {
    throw invalid_parameter_error("sweep mode must be monte-carlo or analytic");
  }

  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec) throw io_error("cannot create output directory: " + args.out_dir);

  const GaussianState<double> state = resolve_state(config);

  MeasurementRecord record;
  const bool monte_carlo = config.mode == "monte-carlo";
  if (monte_carlo) {
    record = sample_shots(state, config.shots, config.seed);
    write_record(record, args.out_dir + "/base_record.mbnl");
  }

  json summary;
  summary["config"] = config_to_json(config);
  summary["state_label"] = state.label;

  if (wants_analysis(config, "criteria") ||
      wants_analysis(config, "normality")) {
    sweep_fig3(config, state, monte_carlo ? &record : nullptr, args.out_dir,
               summary);
  }
  if (!config.fig4_transmissivities.empty()) {
    sweep_fig4(config, args.out_dir, summary);
  }
  if (wants_analysis(config, "keyrate")) {
    sweep_fig5(config, state, monte_carlo ? &record : nullptr, args.out_dir,
               summary);
  }

  const std::string summary_path = args.out_dir + "/sweep.json";
  std::ofstream out(summary_path, std::ios::trunc);
  if (!out) throw io_error("cannot write sweep summary: " + summary_path);
  out << summary.dump(2) << "\n";

  std::cout << "sweep complete -> " << args.out_dir << "\n";
  return 0;
}

}  // namespace mbnla::cli
