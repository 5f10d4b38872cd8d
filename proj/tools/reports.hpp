#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mbnla/criteria.hpp"
#include "mbnla/qkd.hpp"
#include "mbnla/stats.hpp"

namespace mbnla::cli {

// Structured report envelope: one JSON document plus a flat CSV with one row
// per statistic (name, value, ci_low, ci_high). Reports carry no timestamps
// or output paths, so reruns with the same seeds are byte-identical.

struct StatRow {
  std::string name;
  double value = 0;
  double ci_low = 0;
  double ci_high = 0;
};

nlohmann::json record_provenance(const RecordMeta& meta, uint64_t shots);

nlohmann::json cm_to_json(const Eigen::Matrix4d& cm);

std::vector<StatRow> criteria_rows(const CriteriaReport& report);
std::vector<StatRow> keyrate_rows(const KeyRateReport& report, double k_se);
std::vector<StatRow> normality_rows(const NormalityReport& report);

nlohmann::json criteria_to_json(const CriteriaReport& report);
nlohmann::json keyrate_to_json(const KeyRateReport& report, double k_se);
nlohmann::json normality_to_json(const NormalityReport& report);

/// Writes PREFIX.json and PREFIX.csv.
void write_report(const std::string& prefix, const std::string& report_type,
                  const nlohmann::json& config,
                  const nlohmann::json& provenance, const nlohmann::json& body,
                  const std::vector<StatRow>& rows);

/// Bare CSV writer with %.17g formatting.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string format_double(double v);

}  // namespace mbnla::cli
