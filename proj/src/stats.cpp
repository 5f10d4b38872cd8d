#include "mbnla/stats.hpp"

#include <cmath>
#include <sstream>

#include "mbnla/errors.hpp"
#include "mbnla/measurement.hpp"

namespace mbnla {

MomentsResult moments(const MomentAccumulator& acc) {
  if (acc.n < 20) {
    std::ostringstream msg;
    msg << "moment estimation needs at least 20 samples, got " << acc.n;
    throw invalid_parameter_error(msg.str());
  }
  const double n = double(acc.n);
  const double mu = acc.s1 / n;
  const double m2 = acc.s2 / n - mu * mu;
  if (!(m2 > 0)) {
    throw numeric_error("zero variance; standardized moments undefined");
  }
  const double m3 = acc.s3 / n - 3 * mu * acc.s2 / n + 2 * mu * mu * mu;
  const double m4 = acc.s4 / n - 4 * mu * acc.s3 / n +
                    6 * mu * mu * acc.s2 / n - 3 * mu * mu * mu * mu;

  MomentsResult r;
  r.n = acc.n;
  r.mean = mu;
  r.variance = m2;
  r.skewness = m3 / std::pow(m2, 1.5);
  r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  r.se_skewness = std::sqrt(6.0 / n);
  r.se_kurtosis = std::sqrt(24.0 / n);
  return r;
}

MomentsResult moments(std::span<const double> samples) {
  MomentAccumulator acc;
  for (double x : samples) acc.add(x);
  return moments(acc);
}

double jarque_bera_statistic(uint64_t n, double skewness,
                             double excess_kurtosis) {
  return double(n) / 6.0 *
         (skewness * skewness + excess_kurtosis * excess_kurtosis / 4.0);
}

namespace {

StreamNormality stream_normality(const MomentAccumulator& acc,
                                 const std::string& name) {
  if (acc.n < 100) {
    std::ostringstream msg;
    msg << "Jarque-Bera needs at least 100 samples, got " << acc.n << " in "
        << name;
    throw invalid_parameter_error(msg.str());
  }
  StreamNormality s;
  s.stream = name;
  s.m = moments(acc);
  s.jb_statistic = jarque_bera_statistic(s.m.n, s.m.skewness,
                                         s.m.excess_kurtosis);
  s.pass = s.jb_statistic < kJarqueBera95Quantile;
  return s;
}

void require_95(double confidence) {
  if (confidence != 0.95) {
    throw invalid_parameter_error(
        "only the 95% confidence level is supported for Jarque-Bera");
  }
}

}  // namespace

StreamNormality jarque_bera(std::span<const double> samples, double confidence,
                            const std::string& name) {
  require_95(confidence);
  MomentAccumulator acc;
  for (double x : samples) acc.add(x);
  return stream_normality(acc, name);
}

NormalityReport jarque_bera(const MeasurementRecord& record,
                            double confidence) {
  require_95(confidence);
  MomentAccumulator bob_x, bob_p, alice_x, alice_p;
  const uint64_t n = record.size();
  for (uint64_t i = 0; i < n; ++i) {
    bob_x.add(record.bob_x[i]);
    bob_p.add(record.bob_p[i]);
    (record.alice_quad[i] == kQuadX ? alice_x : alice_p).add(record.alice[i]);
  }
  NormalityReport report;
  report.confidence = confidence;
  report.streams.push_back(stream_normality(bob_x, "bob_x"));
  report.streams.push_back(stream_normality(bob_p, "bob_p"));
  report.streams.push_back(stream_normality(alice_x, "alice_x"));
  report.streams.push_back(stream_normality(alice_p, "alice_p"));
  report.all_pass = true;
  for (const auto& s : report.streams) report.all_pass &= s.pass;
  return report;
}

}  // namespace mbnla
