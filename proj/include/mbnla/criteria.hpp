#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mbnla/gaussian.hpp"
#include "mbnla/measurement.hpp"

namespace mbnla {

// Reconstruction of the two-mode state covariance matrix from measurement
// records (heterodyne-deconvolved, shot-noise units, standard form) and the
// Reid / Duan entanglement criteria with bootstrap uncertainties.

/// Weighted single-pass sums over a record, sufficient for covariance
/// reconstruction and every statistic bootstrapped here. Mergeable.
struct RecordMoments {
  // Bob streams over all shots.
  double w = 0, sbx = 0, sbp = 0, sbxx = 0, sbpp = 0;
  // Alice X shots with the matched bob_x coordinate.
  double wx = 0, sax = 0, saxx = 0, sabx = 0, sbx_x = 0, sbxx_x = 0;
  // Alice P shots with the matched bob_p coordinate.
  double wp = 0, sap = 0, sapp = 0, sabp = 0, sbp_p = 0, sbpp_p = 0;

  void add(uint8_t quad, double a, double bx, double bp, double weight = 1.0);
  RecordMoments& operator+=(const RecordMoments& o);
};

RecordMoments accumulate_moments(const MeasurementRecord& record);

/// Covariance estimate in SNU plus entrywise standard errors.
struct CmEstimate {
  Eigen::Matrix4d cm = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d se = Eigen::Matrix4d::Zero();
  uint64_t n_shots = 0;
  uint64_t n_x = 0, n_p = 0;
};

/// Reconstructs the state covariance matrix (SNU, standard form) from a
/// record: Alice diagonals from homodyne subsample variances, Bob diagonals
/// deconvolved by one heterodyne vacuum unit, cross terms from matched
/// quadrature subsamples. Means are estimated and subtracted. Requires at
/// least 100 shots of each Alice quadrature.
CmEstimate reconstruct_cm(const MeasurementRecord& record);

/// Moments-only core used by the bootstrap engine (no minimum-count check
/// beyond degeneracy guards).
Eigen::Matrix4d reconstruct_cm_from_moments(const RecordMoments& m);

/// Reid EPR criterion: products of conditional quadrature variances in SNU.
/// direct = V(x_A|x_B) V(p_A|p_B) (Bob infers Alice), reverse the converse.
/// Values below 1 witness EPR correlations.
template <typename Scalar>
struct ReidResult {
  Scalar direct, reverse;
  Scalar v_xa_xb, v_pa_pb, v_xb_xa, v_pb_pa;
};

template <typename Scalar>
ReidResult<Scalar> reid_epr(const Eigen::Matrix<Scalar, 4, 4>& cm_snu) {
  auto conditional = [](Scalar vu, Scalar vv, Scalar c) {
    if (!(vv > Scalar(0))) {
      throw numeric_error(
          "degenerate conditioning variance in the Reid criterion");
    }
    return vu - c * c / vv;
  };
  ReidResult<Scalar> r;
  r.v_xa_xb = conditional(cm_snu(0, 0), cm_snu(2, 2), cm_snu(0, 2));
  r.v_pa_pb = conditional(cm_snu(1, 1), cm_snu(3, 3), cm_snu(1, 3));
  r.v_xb_xa = conditional(cm_snu(2, 2), cm_snu(0, 0), cm_snu(0, 2));
  r.v_pb_pa = conditional(cm_snu(3, 3), cm_snu(1, 1), cm_snu(1, 3));
  r.direct = r.v_xa_xb * r.v_pa_pb;
  r.reverse = r.v_xb_xa * r.v_pb_pa;
  return r;
}

/// Duan inseparability, gain-optimized and normalized so that values below 1
/// witness entanglement of standard-form Gaussian states:
///   I = min_{lambda>0} [V(x_A - lambda x_B) + V(p_A + lambda p_B)]
///       / (2 (1 + lambda^2)).
/// The minimizer is closed-form; the evaluation below is algebraically
/// rearranged to stay cancellation-free for near-singular inputs.
template <typename Scalar>
Scalar duan_inseparability_at_lambda(const Eigen::Matrix<Scalar, 4, 4>& cm_snu,
                                     Scalar lambda) {
  const Scalar vx = cm_snu(0, 0) + lambda * lambda * cm_snu(2, 2) -
                    Scalar(2) * lambda * cm_snu(0, 2);
  const Scalar vp = cm_snu(1, 1) + lambda * lambda * cm_snu(3, 3) +
                    Scalar(2) * lambda * cm_snu(1, 3);
  return (vx + vp) / (Scalar(2) * (Scalar(1) + lambda * lambda));
}

template <typename Scalar>
Scalar duan_inseparability(const Eigen::Matrix<Scalar, 4, 4>& cm_snu) {
  const Scalar a = cm_snu(0, 0) + cm_snu(1, 1);
  const Scalar b = cm_snu(2, 2) + cm_snu(3, 3);
  const Scalar d = cm_snu(0, 2) - cm_snu(1, 3);
  if (!(a > Scalar(0)) || !(b > Scalar(0)) || !std::isfinite(double(d))) {
    throw numeric_error("degenerate input to the Duan criterion");
  }
  if (d <= Scalar(0)) {
    // No gain from the fixed sign combination; the infimum sits at a
    // boundary of lambda.
    return std::min(a, b) / Scalar(2);
  }
  const Scalar diff = a - b;
  const Scalar root = std::sqrt(diff * diff + Scalar(4) * d * d);
  // Value at the closed-form minimizer, rationalized so it stays accurate
  // when a and b are many orders above the result.
  return (a * b - d * d) / (a + b + root);
}

/// Inseparability of an infinitely squeezed state through a pure-loss channel
/// of transmissivity T: the unbeatable-without-distillation boundary.
/// Evaluated at squeezing r = 12 in extended precision with an agreement
/// check against r = 10.
double perfect_epr_bound(double transmissivity);

/// Bootstrap over shots: Poisson(1) multiplicity weights per shot, keyed by
/// (seed, resample) on a dedicated stream, evaluated through a statistic of
/// the weighted moments. Percentile intervals at the 2-sigma-equivalent
/// quantiles; standard errors from the replicate spread.
struct BootstrapOptions {
  int n_boot = 500;
  uint64_t seed = 0;
  int max_redraws = 100;
};

struct BootstrapSummary {
  Eigen::VectorXd point;  // statistic on the unweighted record
  Eigen::VectorXd se;
  Eigen::VectorXd ci_lo, ci_hi;  // 2-sigma-equivalent percentile interval
  Eigen::MatrixXd replicates;    // n_boot rows
  int redraws = 0;
};

using MomentStatistic =
    std::function<Eigen::VectorXd(const RecordMoments&)>;

BootstrapSummary bootstrap_moments(const MeasurementRecord& record,
                                   const MomentStatistic& statistic,
                                   const BootstrapOptions& options);

/// Scalar convenience wrapper.
struct ScalarBootstrap {
  double point, se, ci_lo, ci_hi;
  int redraws;
};
ScalarBootstrap bootstrap_ci(
    const MeasurementRecord& record,
    const std::function<double(const RecordMoments&)>& statistic,
    int n_boot, uint64_t seed);

/// One confidence interval as reported.
struct Interval {
  double value = 0, lo = 0, hi = 0, se = 0;
};

/// Full criteria evaluation of a record with joint bootstrap intervals.
struct CriteriaReport {
  CmEstimate cm_est;
  Interval e_direct, e_reverse, duan_i;
  Interval v_xa_xb, v_pa_pb, v_xb_xa, v_pb_pa;
  Interval state_purity;  // of the reconstructed state, natural units
  uint64_t n_shots = 0;
  int bootstrap_redraws = 0;
};

CriteriaReport criteria_report(const MeasurementRecord& record,
                               const BootstrapOptions& options);

}  // namespace mbnla
