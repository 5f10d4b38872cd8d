#include "mbnla/criteria.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mbnla/diagnostics.hpp"
#include "mbnla/parallel.hpp"
#include "mbnla/rng.hpp"

namespace mbnla {

void RecordMoments::add(uint8_t quad, double a, double bx, double bp,
                        double weight) {
  w += weight;
  sbx += weight * bx;
  sbp += weight * bp;
  sbxx += weight * bx * bx;
  sbpp += weight * bp * bp;
  if (quad == kQuadX) {
    wx += weight;
    sax += weight * a;
    saxx += weight * a * a;
    sabx += weight * a * bx;
    sbx_x += weight * bx;
    sbxx_x += weight * bx * bx;
  } else {
    wp += weight;
    sap += weight * a;
    sapp += weight * a * a;
    sabp += weight * a * bp;
    sbp_p += weight * bp;
    sbpp_p += weight * bp * bp;
  }
}

RecordMoments& RecordMoments::operator+=(const RecordMoments& o) {
  w += o.w;
  sbx += o.sbx;
  sbp += o.sbp;
  sbxx += o.sbxx;
  sbpp += o.sbpp;
  wx += o.wx;
  sax += o.sax;
  saxx += o.saxx;
  sabx += o.sabx;
  sbx_x += o.sbx_x;
  sbxx_x += o.sbxx_x;
  wp += o.wp;
  sap += o.sap;
  sapp += o.sapp;
  sabp += o.sabp;
  sbp_p += o.sbp_p;
  sbpp_p += o.sbpp_p;
  return *this;
}

RecordMoments accumulate_moments(const MeasurementRecord& record) {
  const uint64_t n = record.size();
  const uint64_t chunk =
      std::max<uint64_t>(1, (n + worker_count() - 1) / worker_count());
  const uint64_t n_shards = n == 0 ? 0 : (n + chunk - 1) / chunk;
  std::vector<RecordMoments> shards(n_shards);
  parallel_for_chunks(0, n_shards, [&](uint64_t s_lo, uint64_t s_hi) {
    for (uint64_t s = s_lo; s < s_hi; ++s) {
      const uint64_t lo = s * chunk;
      const uint64_t hi = std::min(n, lo + chunk);
      for (uint64_t i = lo; i < hi; ++i) {
        shards[s].add(record.alice_quad[i], record.alice[i], record.bob_x[i],
                      record.bob_p[i]);
      }
    }
  });
  RecordMoments total;
  for (const auto& s : shards) total += s;
  return total;
}

Eigen::Matrix4d reconstruct_cm_from_moments(const RecordMoments& m) {
  if (m.w < 2 || m.wx < 2 || m.wp < 2) {
    throw numeric_error("too few effective shots to reconstruct a covariance");
  }
  const double mbx = m.sbx / m.w;
  const double mbp = m.sbp / m.w;
  const double var_bx = m.sbxx / m.w - mbx * mbx;
  const double var_bp = m.sbpp / m.w - mbp * mbp;

  const double max_ = m.sax / m.wx;
  const double map_ = m.sap / m.wp;
  const double var_ax = m.saxx / m.wx - max_ * max_;
  const double var_ap = m.sapp / m.wp - map_ * map_;
  if (!(var_ax > 0) || !(var_ap > 0) || !(var_bx > 0) || !(var_bp > 0)) {
    throw numeric_error("degenerate variance in covariance reconstruction");
  }

  const double mbx_x = m.sbx_x / m.wx;
  const double mbp_p = m.sbp_p / m.wp;
  const double cov_x = m.sabx / m.wx - max_ * mbx_x;
  const double cov_p = m.sabp / m.wp - map_ * mbp_p;

  // Deconvolution to state SNU: Alice homodyne variances double; Bob loses
  // one heterodyne vacuum unit; cross terms double. Intra-mode cross terms
  // are fixed at zero (standard form).
  const double v_xb = 2.0 * var_bx - 1.0;
  const double v_pb = 2.0 * var_bp - 1.0;
  if (!(v_xb > 0) || !(v_pb > 0)) {
    std::ostringstream msg;
    msg << "unphysical estimate: deconvolved Bob variance non-positive ("
        << v_xb << ", " << v_pb << ")";
    throw numeric_error(msg.str());
  }

  Eigen::Matrix4d cm = Eigen::Matrix4d::Zero();
  cm(0, 0) = 2.0 * var_ax;
  cm(1, 1) = 2.0 * var_ap;
  cm(2, 2) = v_xb;
  cm(3, 3) = v_pb;
  cm(0, 2) = cm(2, 0) = 2.0 * cov_x;
  cm(1, 3) = cm(3, 1) = 2.0 * cov_p;
  return cm;
}

CmEstimate reconstruct_cm(const MeasurementRecord& record) {
  uint64_t n_x = 0;
  for (uint8_t q : record.alice_quad) n_x += (q == kQuadX);
  const uint64_t n = record.size();
  const uint64_t n_p = n - n_x;
  if (n_x < 100 || n_p < 100) {
    std::ostringstream msg;
    msg << "covariance reconstruction needs >= 100 shots per Alice "
           "quadrature, got "
        << n_x << " X and " << n_p << " P";
    throw invalid_parameter_error(msg.str());
  }

  const RecordMoments m = accumulate_moments(record);
  CmEstimate est;
  est.cm = reconstruct_cm_from_moments(m);
  est.n_shots = n;
  est.n_x = n_x;
  est.n_p = n_p;

  // Normal-theory standard errors, in SNU like the estimate itself.
  const double var_bx = m.sbxx / m.w - (m.sbx / m.w) * (m.sbx / m.w);
  const double var_bp = m.sbpp / m.w - (m.sbp / m.w) * (m.sbp / m.w);
  const double var_ax =
      m.saxx / m.wx - (m.sax / m.wx) * (m.sax / m.wx);
  const double var_ap =
      m.sapp / m.wp - (m.sap / m.wp) * (m.sap / m.wp);
  const double var_bx_x =
      m.sbxx_x / m.wx - (m.sbx_x / m.wx) * (m.sbx_x / m.wx);
  const double var_bp_p =
      m.sbpp_p / m.wp - (m.sbp_p / m.wp) * (m.sbp_p / m.wp);
  est.se.setZero();
  est.se(0, 0) = 2.0 * var_ax * std::sqrt(2.0 / double(n_x - 1));
  est.se(1, 1) = 2.0 * var_ap * std::sqrt(2.0 / double(n_p - 1));
  est.se(2, 2) = 2.0 * var_bx * std::sqrt(2.0 / double(n - 1));
  est.se(3, 3) = 2.0 * var_bp * std::sqrt(2.0 / double(n - 1));
  const double cov_x = est.cm(0, 2) / 2.0;
  const double cov_p = est.cm(1, 3) / 2.0;
  est.se(0, 2) = est.se(2, 0) =
      2.0 * std::sqrt((var_ax * var_bx_x + cov_x * cov_x) / double(n_x));
  est.se(1, 3) = est.se(3, 1) =
      2.0 * std::sqrt((var_ap * var_bp_p + cov_p * cov_p) / double(n_p));
  return est;
}

double perfect_epr_bound(double transmissivity) {
  if (!(transmissivity > 0) || !(transmissivity <= 1)) {
    std::ostringstream msg;
    msg << "transmissivity must lie in (0, 1], got " << transmissivity;
    throw invalid_parameter_error(msg.str());
  }
  // Lossy two-mode squeezed state in SNU, built directly so the closed-form
  // Duan evaluation runs in extended precision without an eigensolve.
  auto lossy_duan = [&](long double r) {
    const long double v = std::cosh(2.0L * r);
    const long double t = static_cast<long double>(transmissivity);
    Eigen::Matrix<long double, 4, 4> cm =
        Eigen::Matrix<long double, 4, 4>::Zero();
    cm(0, 0) = cm(1, 1) = v;
    cm(2, 2) = cm(3, 3) = t * v + (1.0L - t);
    const long double cross = std::sqrt(t) * std::sqrt(v * v - 1.0L);
    cm(0, 2) = cm(2, 0) = cross;
    cm(1, 3) = cm(3, 1) = -cross;
    return duan_inseparability<long double>(cm);
  };
  const long double at_12 = lossy_duan(12.0L);
  const long double at_10 = lossy_duan(10.0L);
  if (std::abs(double(at_12 - at_10)) > 1e-6) {
    throw numeric_error(
        "perfect-EPR bound failed its r = 10 vs r = 12 agreement check");
  }
  return double(at_12);
}

namespace {

// Poisson(1) multiplicities from single 32-bit words; the tail beyond the
// 2^-32 resolution is folded into the last bin.
const std::array<uint32_t, 16>& poisson_thresholds() {
  static const std::array<uint32_t, 16> table = [] {
    std::array<uint32_t, 16> t{};
    long double p = std::exp(-1.0L);
    long double cum = 0.0L;
    long double fact = 1.0L;
    for (int k = 0; k < 16; ++k) {
      if (k > 0) fact *= k;
      cum += p / fact;
      const long double scaled = cum * 4294967296.0L;
      t[k] = scaled >= 4294967296.0L ? 0xFFFFFFFFu
                                     : static_cast<uint32_t>(scaled);
    }
    t[15] = 0xFFFFFFFFu;
    return t;
  }();
  return table;
}

inline uint32_t poisson_from_word(uint32_t word) {
  const auto& thr = poisson_thresholds();
  uint32_t k = 0;
  while (k + 1 < thr.size() && word >= thr[k]) ++k;
  return k;
}

RecordMoments weighted_moments(const MeasurementRecord& record, uint64_t seed,
                               uint32_t block) {
  RecordMoments m;
  const uint64_t n = record.size();
  for (uint64_t i = 0; i < n; i += 4) {
    const auto words = rng_block(seed, Stream::Bootstrap, i >> 2, block);
    const uint64_t hi = std::min<uint64_t>(n, i + 4);
    for (uint64_t j = i; j < hi; ++j) {
      const uint32_t weight = poisson_from_word(words[j - i]);
      if (weight > 0) {
        m.add(record.alice_quad[j], record.alice[j], record.bob_x[j],
              record.bob_p[j], double(weight));
      }
    }
  }
  return m;
}

}  // namespace

BootstrapSummary bootstrap_moments(const MeasurementRecord& record,
                                   const MomentStatistic& statistic,
                                   const BootstrapOptions& options) {
  if (options.n_boot < 200) {
    throw invalid_parameter_error("bootstrap needs at least 200 resamples");
  }
  if (record.size() == 0) {
    throw invalid_parameter_error("cannot bootstrap an empty record");
  }

  BootstrapSummary summary;
  summary.point = statistic(accumulate_moments(record));
  const int dim = int(summary.point.size());
  summary.replicates.resize(options.n_boot, dim);

  std::vector<int> redraws(options.n_boot, 0);
  parallel_for_chunks(0, uint64_t(options.n_boot), [&](uint64_t lo,
                                                       uint64_t hi) {
    for (uint64_t r = lo; r < hi; ++r) {
      for (int attempt = 0;; ++attempt) {
        if (attempt > options.max_redraws) {
          throw numeric_error(
              "bootstrap resample stayed degenerate after redraw budget");
        }
        const uint32_t block =
            attempt == 0 ? uint32_t(r)
                         : uint32_t(options.n_boot) +
                               uint32_t(r) * uint32_t(options.max_redraws) +
                               uint32_t(attempt - 1);
        try {
          const RecordMoments m =
              weighted_moments(record, options.seed, block);
          summary.replicates.row(long(r)) = statistic(m).transpose();
          redraws[r] = attempt;
          break;
        } catch (const numeric_error&) {
          continue;  // statistic undefined on this resample; redraw
        } catch (const unphysical_state_error&) {
          continue;  // resampled estimate left the physical set; redraw
        }
      }
    }
  });

  summary.redraws = 0;
  for (int r : redraws) summary.redraws += r;
  if (summary.redraws > 0) {
    diag_counters().bootstrap_redraws += summary.redraws;
    std::ostringstream msg;
    msg << "bootstrap redrew " << summary.redraws << " degenerate resamples";
    note(msg.str());
  }

  // Spread and 2-sigma-equivalent percentile interval per component.
  summary.se.resize(dim);
  summary.ci_lo.resize(dim);
  summary.ci_hi.resize(dim);
  const double q_lo = 0.022750131948179195;  // Phi(-2)
  const double q_hi = 0.977249868051820805;
  std::vector<double> column(options.n_boot);
  for (int d = 0; d < dim; ++d) {
    for (int r = 0; r < options.n_boot; ++r) {
      column[r] = summary.replicates(r, d);
    }
    const double mean =
        std::accumulate(column.begin(), column.end(), 0.0) / options.n_boot;
    double ss = 0;
    for (double v : column) ss += (v - mean) * (v - mean);
    summary.se(d) = std::sqrt(ss / std::max(1, options.n_boot - 1));
    std::sort(column.begin(), column.end());
    auto quantile = [&](double q) {
      const double pos = q * (options.n_boot - 1);
      const int i = int(std::floor(pos));
      const double frac = pos - i;
      if (i + 1 >= options.n_boot) return column.back();
      return column[i] * (1.0 - frac) + column[i + 1] * frac;
    };
    summary.ci_lo(d) = quantile(q_lo);
    summary.ci_hi(d) = quantile(q_hi);
  }
  return summary;
}

ScalarBootstrap bootstrap_ci(
    const MeasurementRecord& record,
    const std::function<double(const RecordMoments&)>& statistic, int n_boot,
    uint64_t seed) {
  BootstrapOptions options;
  options.n_boot = n_boot;
  options.seed = seed;
  const BootstrapSummary s = bootstrap_moments(
      record,
      [&](const RecordMoments& m) {
        Eigen::VectorXd v(1);
        v(0) = statistic(m);
        return v;
      },
      options);
  return {s.point(0), s.se(0), s.ci_lo(0), s.ci_hi(0), s.redraws};
}

namespace {

Eigen::VectorXd criteria_statistics(const RecordMoments& m) {
  const Eigen::Matrix4d cm = reconstruct_cm_from_moments(m);
  const ReidResult<double> reid = reid_epr(cm);
  Eigen::VectorXd v(8);
  v(0) = reid.direct;
  v(1) = reid.reverse;
  v(2) = duan_inseparability(cm);
  v(3) = reid.v_xa_xb;
  v(4) = reid.v_pa_pb;
  v(5) = reid.v_xb_xa;
  v(6) = reid.v_pb_pa;
  const double det = cm_to_natural(cm).determinant();
  if (!(det > 0)) {
    throw numeric_error("reconstructed state determinant non-positive");
  }
  v(7) = 1.0 / (4.0 * std::sqrt(det));
  return v;
}

}  // namespace

CriteriaReport criteria_report(const MeasurementRecord& record,
                               const BootstrapOptions& options) {
  CriteriaReport report;
  report.cm_est = reconstruct_cm(record);
  report.n_shots = record.size();

  const BootstrapSummary s =
      bootstrap_moments(record, criteria_statistics, options);
  auto interval = [&](int d) {
    return Interval{s.point(d), s.ci_lo(d), s.ci_hi(d), s.se(d)};
  };
  report.e_direct = interval(0);
  report.e_reverse = interval(1);
  report.duan_i = interval(2);
  report.v_xa_xb = interval(3);
  report.v_pa_pb = interval(4);
  report.v_xb_xa = interval(5);
  report.v_pb_pa = interval(6);
  report.state_purity = interval(7);
  report.bootstrap_redraws = s.redraws;
  return report;
}

}  // namespace mbnla
