#include "config.hpp"

#include <algorithm>
#include <fstream>

#include "mbnla/errors.hpp"

namespace mbnla::cli {

using nlohmann::json;

namespace {

Mode parse_mode(const std::string& s) {
  if (s == "A" || s == "a") return Mode::A;
  if (s == "B" || s == "b") return Mode::B;
  throw invalid_parameter_error("channel mode must be \"A\" or \"B\", got " +
                                s);
}

StateSpec parse_state(const json& j) {
  StateSpec spec;
  spec.type = j.value("type", "tmsv");
  if (spec.type == "tmsv") {
    spec.r = j.at("r").get<double>();
  } else if (spec.type == "squeezers") {
    spec.v_sq = j.at("v_sq").get<double>();
    spec.v_anti = j.at("v_anti").get<double>();
  } else if (spec.type == "cm") {
    const auto rows = j.at("cm_snu");
    if (!rows.is_array() || rows.size() != 4) {
      throw invalid_parameter_error("cm_snu must be a 4x4 array");
    }
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k < 4; ++k) {
        spec.cm_snu(i, k) = rows.at(i).at(k).get<double>();
      }
    }
    spec.label = j.value("label", "custom");
  } else {
    throw invalid_parameter_error("unknown state type: " + spec.type);
  }
  return spec;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw invalid_parameter_error("config is not valid JSON (" + path +
                                  "): " + e.what());
  }

  ExperimentConfig config;
  try {
    config.state = parse_state(j.at("state"));
    for (const auto& c : j.value("channels", json::array())) {
      ChannelSpec ch;
      ch.mode = parse_mode(c.value("mode", "B"));
      ch.transmissivity = c.at("transmissivity").get<double>();
      ch.n_thermal = c.value("n_thermal", 0.0);
      config.channels.push_back(ch);
    }
    config.shots = j.value("shots", config.shots);
    config.seed = j.value("seed", config.seed);
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      if (f.contains("gains")) {
        config.gains = f.at("gains").get<std::vector<double>>();
      }
      config.cutoff_sd = f.value("cutoff_sd", config.cutoff_sd);
      config.filter_seed = f.value("seed", config.filter_seed);
    }
    if (j.contains("analyses")) {
      config.analyses = j.at("analyses").get<std::vector<std::string>>();
    }
    config.beta_rec = j.value("beta_rec", config.beta_rec);
    if (j.contains("bootstrap")) {
      config.n_boot = j.at("bootstrap").value("n_boot", config.n_boot);
      config.boot_seed = j.at("bootstrap").value("seed", config.boot_seed);
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      if (s.contains("fig4_transmissivities")) {
        config.fig4_transmissivities =
            s.at("fig4_transmissivities").get<std::vector<double>>();
      }
      config.mode = s.value("mode", config.mode);
    }
  } catch (const json::exception& e) {
    throw invalid_parameter_error(std::string("malformed config: ") +
                                  e.what());
  }

  if (config.shots < 1) {
    throw invalid_parameter_error("config: shots must be >= 1");
  }
  for (double g : config.gains) {
    if (!(g >= 1.0)) {
      throw invalid_parameter_error("config: every gain must be >= 1");
    }
  }
  if (!std::is_sorted(config.gains.begin(), config.gains.end())) {
    throw invalid_parameter_error("config: gains must be sorted ascending");
  }
  if (config.mode != "monte-carlo" && config.mode != "analytic") {
    throw invalid_parameter_error(
        "config: sweep mode must be \"monte-carlo\" or \"analytic\"");
  }
  return config;
}

GaussianState<double> resolve_state(const ExperimentConfig& config) {
  GaussianState<double> state;
  if (config.state.type == "tmsv") {
    state = make_tmsv(config.state.r);
  } else if (config.state.type == "squeezers") {
    state = make_epr_from_squeezers(config.state.v_sq, config.state.v_anti);
  } else {
    state.cm = cm_to_natural(config.state.cm_snu);
    state.label = config.state.label;
    validate_state(state);
  }
  for (const auto& ch : config.channels) {
    state = apply_loss(state, ch.mode, ch.transmissivity, ch.n_thermal);
  }
  return state;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  json state;
  state["type"] = config.state.type;
  if (config.state.type == "tmsv") {
    state["r"] = config.state.r;
  } else if (config.state.type == "squeezers") {
    state["v_sq"] = config.state.v_sq;
    state["v_anti"] = config.state.v_anti;
  } else {
    json rows = json::array();
    for (int i = 0; i < 4; ++i) {
      json row = json::array();
      for (int k = 0; k < 4; ++k) row.push_back(config.state.cm_snu(i, k));
      rows.push_back(row);
    }
    state["cm_snu"] = rows;
    state["label"] = config.state.label;
  }

  json channels = json::array();
  for (const auto& ch : config.channels) {
    channels.push_back({{"mode", mode_name(ch.mode)},
                        {"transmissivity", ch.transmissivity},
                        {"n_thermal", ch.n_thermal}});
  }

  return json{{"state", state},
              {"channels", channels},
              {"shots", config.shots},
              {"seed", config.seed},
              {"filter",
               {{"gains", config.gains},
                {"cutoff_sd", config.cutoff_sd},
                {"seed", config.filter_seed}}},
              {"analyses", config.analyses},
              {"beta_rec", config.beta_rec},
              {"bootstrap", {{"n_boot", config.n_boot},
                             {"seed", config.boot_seed}}},
              {"sweep",
               {{"fig4_transmissivities", config.fig4_transmissivities},
                {"mode", config.mode}}}};
}

bool wants_analysis(const ExperimentConfig& config, const std::string& name) {
  return std::find(config.analyses.begin(), config.analyses.end(), name) !=
         config.analyses.end();
}

}  // namespace mbnla::cli
