#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <sstream>

#include "mbnla/gaussian.hpp"
#include "mbnla/measurement.hpp"

namespace mbnla {

// Measurement-based noiseless linear amplification: a truncated g^n filter
// applied shot-by-shot to Bob's heterodyne outcomes, with accepted outcomes
// rescaled by 1/g, plus the closed-form Gaussian map of the ideal amplifier
// used as its oracle.
//
// Outcome amplitudes are expressed in natural coherent-amplitude units,
// alpha = (bob_x + i bob_p)/sqrt(2), so the vacuum outcome distribution has
// variance 1/2 per component. In these units the acceptance weight
// exp[(1 - g^-2)(|alpha|^2 - alpha_c^2)] reproduces, after the 1/g
// rescaling, the heterodyne statistics of the ideally amplified state; the
// chi -> g*chi closed-form test pins this normalization.

/// Amplifier gain and truncation amplitude (alpha-plane units, matching
/// (x + ip)/sqrt(2) of Bob's outcomes). alpha_c = 0 disables truncation and
/// the filter is identically 1.
struct FilterSpec {
  double gain = 1.0;
  double alpha_c = 0.0;
};

void validate(const FilterSpec& spec);

/// Acceptance probability for a single heterodyne outcome. Radially
/// symmetric, continuous and monotone non-decreasing in |alpha|, identically
/// 1 for gain 1 and for |alpha| >= alpha_c.
double filter_probability(std::complex<double> alpha, const FilterSpec& spec);

/// Same filter evaluated from |alpha|^2; the form used in the hot loop.
double filter_probability_from_norm(double alpha_norm_sq,
                                    const FilterSpec& spec);

struct CutoffDiagnostics {
  double sigma_alpha = 0;  // per-component standard deviation of alpha
  double anisotropy = 1;   // eigenvalue ratio of the outcome covariance
  bool warned = false;
};

/// Truncation amplitude at k_sd per-component standard deviations of Bob's
/// outcome distribution: alpha_c = k_sd * sqrt(mean eigenvalue of
/// (cm_B + I/2) / 2). One cutoff serves every gain of a sweep. k_sd must be
/// 0 (degenerate, filter identically 1) or in [3, 8]; warns when the outcome
/// covariance is anisotropic by more than a factor 2.
double choose_cutoff(const GaussianState<double>& state, double k_sd,
                     CutoffDiagnostics* diag = nullptr);

/// Empirical variant sized from a record's Bob streams.
double choose_cutoff(const MeasurementRecord& record, double k_sd,
                     CutoffDiagnostics* diag = nullptr);

/// Cutoff for a gain sweep: one alpha_c serving every gain, sized so it
/// accommodates the largest gain applied — k_sd standard deviations of the
/// ideally amplified state's outcome distribution at g_max. Reduces to
/// choose_cutoff(state, k_sd) at g_max = 1 and on gain-invariant states
/// (vacuum). Sizing to the input state instead leaves the strongest filters
/// measurably short of the ideal amplifier.
double choose_cutoff_for_sweep(const GaussianState<double>& state, double k_sd,
                               double g_max,
                               CutoffDiagnostics* diag = nullptr);

/// Post-selected record: accepted shots only, Bob outcomes divided by g.
struct FilterOutcome {
  MeasurementRecord record;
  double p_success = 1.0;  // exactly n_accept / n_in
  uint64_t n_in = 0;
  uint64_t n_accept = 0;
};

/// Applies the filter to an unfiltered record. Each shot is kept
/// independently with probability filter_probability(alpha_shot), alpha_shot
/// = (bob_x + i bob_p)/sqrt(2); kept shots have their Bob pair divided by g
/// while Alice values are untouched. Acceptance variates come from a
/// dedicated stream, so the same (record, spec, seed) always yields the same
/// outcome and a record is never perturbed by filtering it.
FilterOutcome apply_mbnla(const MeasurementRecord& record,
                          const FilterSpec& spec, uint64_t seed);

/// Largest admissible gain for the ideal amplifier on this state, located by
/// bisection at the given resolution; +infinity when unbounded (vacuum Bob
/// arm).
double gain_bound(const GaussianState<double>& state,
                  double resolution = 1e-6);

/// Expected acceptance probability of the filter on the state's Bob outcome
/// distribution, integral of P(alpha) against the outcome density. The
/// region beyond the cutoff contributes its full Gaussian mass. Adaptive
/// quadrature at the given relative tolerance.
double analytic_success_probability(const GaussianState<double>& state,
                                    const FilterSpec& spec,
                                    double rel_tol = 1e-6);

namespace detail {

/// Validity of the ideal-amplifier map at gain g without constructing the
/// output: the reweighted outcome precision must stay positive definite and
/// the resulting covariance matrix physical.
template <typename Scalar>
bool nla_gain_admissible(const GaussianState<Scalar>& state, Scalar gain) {
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
  const Matrix4 sigma_q =
      state.cm + Scalar(0.5) * Matrix4::Identity();
  const Matrix4 precision = sigma_q.inverse();
  Matrix4 modified = precision;
  const Scalar c = Scalar(1) - Scalar(1) / (gain * gain);
  modified(2, 2) -= c;
  modified(3, 3) -= c;
  Eigen::LLT<Matrix4> llt(modified);
  if (llt.info() != Eigen::Success) return false;
  Matrix4 sigma = llt.solve(Matrix4::Identity());
  sigma.middleRows(2, 2) /= gain;
  sigma.middleCols(2, 2) /= gain;
  const Matrix4 cm_out =
      sigma - Scalar(0.5) * Matrix4::Identity();
  try {
    const auto nu = symplectic_eigenvalues(cm_out);
    return nu[1] >= Scalar(0.5) - physicality_tol(cm_out);
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace detail

/// Ideal noiseless amplification of the state itself: reweights the two-mode
/// outcome (Q-function) density by exp[(1-g^-2)|beta|^2] on Bob's arm,
/// |beta|^2 = (beta_x^2 + beta_p^2)/2, then substitutes beta = g alpha.
/// Concretely: Sigma_Q = cm + I/2; subtract (1-g^-2) from Bob's diagonal of
/// the precision; invert; divide Bob rows and columns by g; subtract I/2.
/// Means transform accordingly (a coherent amplitude gains a factor g).
template <typename Scalar>
GaussianState<Scalar> analytic_nla(const GaussianState<Scalar>& state,
                                   Scalar gain) {
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
  if (!(gain >= Scalar(1)) || !std::isfinite(double(gain))) {
    std::ostringstream msg;
    msg << "amplifier gain must be >= 1, got " << double(gain);
    throw invalid_parameter_error(msg.str());
  }
  validate_state(state);

  const Matrix4 sigma_q = state.cm + Scalar(0.5) * Matrix4::Identity();
  const Matrix4 precision = sigma_q.inverse();
  Matrix4 modified = precision;
  const Scalar c = Scalar(1) - Scalar(1) / (gain * gain);
  modified(2, 2) -= c;
  modified(3, 3) -= c;

  auto bound_error = [&]() -> gain_exceeds_bound_error {
    double supremum = std::numeric_limits<double>::quiet_NaN();
    if constexpr (std::is_same_v<Scalar, double>) {
      supremum = gain_bound(state);
    }
    std::ostringstream msg;
    msg << "gain " << double(gain) << " exceeds the amplifier bound for "
        << state.label << " (supremum " << supremum << ")";
    return gain_exceeds_bound_error(msg.str(), supremum);
  };

  Eigen::LLT<Matrix4> llt(modified);
  if (llt.info() != Eigen::Success) throw bound_error();
  Matrix4 sigma = llt.solve(Matrix4::Identity());

  GaussianState<Scalar> out;
  out.mean = sigma * (precision * state.mean);
  out.mean.segment(2, 2) /= gain;
  sigma.middleRows(2, 2) /= gain;
  sigma.middleCols(2, 2) /= gain;
  out.cm = sigma - Scalar(0.5) * Matrix4::Identity();
  out.cm = Scalar(0.5) * (out.cm + out.cm.transpose());

  const auto nu = symplectic_eigenvalues(out.cm);
  if (nu[1] < Scalar(0.5) - physicality_tol(out.cm)) throw bound_error();

  std::ostringstream label;
  label << state.label << " -> nla(g=" << double(gain) << ")";
  out.label = label.str();
  return out;
}

}  // namespace mbnla
