#include "reports.hpp"

#include <cstdio>
#include <fstream>

#include "mbnla/errors.hpp"

namespace mbnla::cli {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json record_provenance(const RecordMeta& meta, uint64_t shots) {
  char digest[20];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(meta.state_digest));
  return json{{"state_digest", digest},
              {"seed", meta.seed},
              {"shots", shots},
              {"gain", meta.gain},
              {"convention", meta.convention}};
}

nlohmann::json cm_to_json(const Eigen::Matrix4d& cm) {
  json rows = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int k = 0; k < 4; ++k) row.push_back(cm(i, k));
    rows.push_back(row);
  }
  return rows;
}

namespace {

StatRow row_of(const std::string& name, const Interval& iv) {
  return {name, iv.value, iv.lo, iv.hi};
}

json interval_json(const Interval& iv) {
  return json{{"value", iv.value}, {"ci_low", iv.lo}, {"ci_high", iv.hi},
              {"se", iv.se}};
}

}  // namespace

std::vector<StatRow> criteria_rows(const CriteriaReport& r) {
  return {row_of("e_direct", r.e_direct),
          row_of("e_reverse", r.e_reverse),
          row_of("duan_i", r.duan_i),
          row_of("v_xa_given_xb", r.v_xa_xb),
          row_of("v_pa_given_pb", r.v_pa_pb),
          row_of("v_xb_given_xa", r.v_xb_xa),
          row_of("v_pb_given_pa", r.v_pb_pa),
          row_of("state_purity", r.state_purity)};
}

std::vector<StatRow> keyrate_rows(const KeyRateReport& r, double k_se) {
  return {{"key_rate", r.k, r.k - k_se, r.k + k_se},
          {"mutual_information", r.i_ab, r.i_ab, r.i_ab},
          {"holevo_bound", r.s_ae, r.s_ae, r.s_ae},
          {"t_eff", r.t_eff, r.t_eff, r.t_eff},
          {"xi", r.xi, r.xi, r.xi}};
}

std::vector<StatRow> normality_rows(const NormalityReport& r) {
  std::vector<StatRow> rows;
  for (const auto& s : r.streams) {
    rows.push_back({s.stream + ".skewness", s.m.skewness,
                    s.m.skewness - 2 * s.m.se_skewness,
                    s.m.skewness + 2 * s.m.se_skewness});
    rows.push_back({s.stream + ".excess_kurtosis", s.m.excess_kurtosis,
                    s.m.excess_kurtosis - 2 * s.m.se_kurtosis,
                    s.m.excess_kurtosis + 2 * s.m.se_kurtosis});
    rows.push_back({s.stream + ".jarque_bera", s.jb_statistic,
                    s.jb_statistic, s.jb_statistic});
  }
  return rows;
}

nlohmann::json criteria_to_json(const CriteriaReport& r) {
  return json{{"cm_est_snu", cm_to_json(r.cm_est.cm)},
              {"cm_se_snu", cm_to_json(r.cm_est.se)},
              {"n_shots", r.n_shots},
              {"n_x", r.cm_est.n_x},
              {"n_p", r.cm_est.n_p},
              {"e_direct", interval_json(r.e_direct)},
              {"e_reverse", interval_json(r.e_reverse)},
              {"duan_i", interval_json(r.duan_i)},
              {"v_xa_given_xb", interval_json(r.v_xa_xb)},
              {"v_pa_given_pb", interval_json(r.v_pa_pb)},
              {"v_xb_given_xa", interval_json(r.v_xb_xa)},
              {"v_pb_given_pa", interval_json(r.v_pb_pa)},
              {"state_purity", interval_json(r.state_purity)},
              {"bootstrap_redraws", r.bootstrap_redraws}};
}

nlohmann::json keyrate_to_json(const KeyRateReport& r, double k_se) {
  return json{{"i_ab", r.i_ab},
              {"s_ae", r.s_ae},
              {"k", r.k},
              {"k_se", k_se},
              {"beta_rec", r.beta_rec},
              {"nu", {r.nu[0], r.nu[1]}},
              {"t_eff", r.t_eff},
              {"xi", r.xi},
              {"gain", r.gain},
              {"pure_source_clamp", r.pure_source_clamp}};
}

nlohmann::json normality_to_json(const NormalityReport& r) {
  json streams = json::array();
  for (const auto& s : r.streams) {
    streams.push_back({{"stream", s.stream},
                       {"n", s.m.n},
                       {"skewness", s.m.skewness},
                       {"se_skewness", s.m.se_skewness},
                       {"excess_kurtosis", s.m.excess_kurtosis},
                       {"se_kurtosis", s.m.se_kurtosis},
                       {"jb_statistic", s.jb_statistic},
                       {"pass", s.pass}});
  }
  return json{{"confidence", r.confidence},
              {"streams", streams},
              {"all_pass", r.all_pass}};
}

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open CSV for writing: " + path);
  for (size_t i = 0; i < header.size(); ++i) {
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  }
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
    }
  }
  if (!out) throw io_error("short write to CSV: " + path);
}

void write_report(const std::string& prefix, const std::string& report_type,
                  const nlohmann::json& config,
                  const nlohmann::json& provenance, const nlohmann::json& body,
                  const std::vector<StatRow>& rows) {
  json doc;
  doc["report_type"] = report_type;
  doc["format_version"] = 1;
  doc["config"] = config;
  doc["record"] = provenance;
  doc["result"] = body;
  json stats = json::array();
  for (const auto& row : rows) {
    stats.push_back({{"name", row.name},
                     {"value", row.value},
                     {"ci_low", row.ci_low},
                     {"ci_high", row.ci_high}});
  }
  doc["statistics"] = stats;

  const std::string json_path = prefix + ".json";
  std::ofstream out(json_path, std::ios::trunc);
  if (!out) throw io_error("cannot open report for writing: " + json_path);
  out << doc.dump(2) << "\n";
  if (!out) throw io_error("short write to report: " + json_path);

  std::vector<std::vector<std::string>> csv_rows;
  csv_rows.reserve(rows.size());
  for (const auto& row : rows) {
    csv_rows.push_back({row.name, format_double(row.value),
                        format_double(row.ci_low), format_double(row.ci_high)});
  }
  write_csv(prefix + ".csv", {"name", "value", "ci_low", "ci_high"}, csv_rows);
}

}  // namespace mbnla::cli
