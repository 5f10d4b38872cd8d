#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mbnla {

struct MeasurementRecord;

// Normality diagnostics for post-selected ensembles: standardized third and
// fourth moments plus the Jarque-Bera test, evaluated per outcome stream.

/// Single-pass power sums; mergeable across shards.
struct MomentAccumulator {
  uint64_t n = 0;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;

  void add(double x) {
    const double x2 = x * x;
    n += 1;
    s1 += x;
    s2 += x2;
    s3 += x2 * x;
    s4 += x2 * x2;
  }
  MomentAccumulator& operator+=(const MomentAccumulator& o) {
    n += o.n;
    s1 += o.s1;
    s2 += o.s2;
    s3 += o.s3;
    s4 += o.s4;
    return *this;
  }
};

struct MomentsResult {
  uint64_t n = 0;
  double mean = 0;
  double variance = 0;          // population form
  double skewness = 0;          // m3 / m2^{3/2}
  double excess_kurtosis = 0;   // m4 / m2^2 - 3
  double se_skewness = 0;       // sqrt(6/n)
  double se_kurtosis = 0;       // sqrt(24/n)
};

/// Population-form standardized moments with their normal-theory standard
/// errors. Requires n >= 20 and nonzero variance.
MomentsResult moments(const MomentAccumulator& acc);
MomentsResult moments(std::span<const double> samples);

/// JB = (n/6)(S^2 + K^2/4).
double jarque_bera_statistic(uint64_t n, double skewness,
                             double excess_kurtosis);

/// 95th percentile of chi-square with 2 degrees of freedom; the only
/// confidence level supported, so the constant is pinned here rather than
/// pulling in a special-functions dependency.
inline constexpr double kJarqueBera95Quantile = 5.9915;

struct StreamNormality {
  std::string stream;
  MomentsResult m;
  double jb_statistic = 0;
  bool pass = false;
};

struct NormalityReport {
  double confidence = 0.95;
  std::vector<StreamNormality> streams;
  bool all_pass = false;
};

/// Jarque-Bera normality test on one sample stream. Requires n >= 100;
/// only confidence = 0.95 is supported.
StreamNormality jarque_bera(std::span<const double> samples,
                            double confidence = 0.95,
                            const std::string& name = "samples");

/// Per-stream breakdown over a record: bob_x, bob_p, Alice X shots, Alice P
/// shots.
NormalityReport jarque_bera(const MeasurementRecord& record,
                            double confidence = 0.95);

}  // namespace mbnla
