#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>

#include "mbnla/errors.hpp"
#include "mbnla/symplectic.hpp"

namespace mbnla {

// Two-mode Gaussian states and the exact channel maps acting on them. This is
// the analytic backbone of the toolkit: everything downstream (sampling,
// filtering, criteria, key rates) is checked against states built here.
//
// Internally everything lives in natural units, vacuum quadrature variance
// 1/2, which matches the alpha = (x + ip)/sqrt(2) heterodyne convention and
// keeps the filter algebra free of sqrt(2) bookkeeping. Shot-noise units
// (vacuum = 1) appear only at reporting boundaries via cm_to_snu.

/// Which arm of the two-mode state an operation acts on.
enum class Mode { A = 0, B = 1 };

inline const char* mode_name(Mode m) { return m == Mode::A ? "A" : "B"; }

/// Zero-mean two-mode Gaussian state over quadratures (x_A, p_A, x_B, p_B).
/// The mean vector is carried for generality but all in-scope sources are
/// zero-mean.
template <typename Scalar = double>
struct GaussianState {
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
  using Vector4 = Eigen::Matrix<Scalar, 4, 1>;

  Matrix4 cm = Scalar(0.5) * Matrix4::Identity();
  Vector4 mean = Vector4::Zero();
  std::string label = "vacuum";

  Matrix2 block(Mode m) const {
    const int o = m == Mode::A ? 0 : 2;
    return cm.template block<2, 2>(o, o);
  }
  /// Cross block C with rows on mode A, columns on mode B.
  Matrix2 cross() const { return cm.template block<2, 2>(0, 2); }
};

/// SNU <-> natural-unit conversions for covariance matrices.
template <typename Derived>
auto cm_to_snu(const Eigen::MatrixBase<Derived>& cm_natural) {
  return (typename Derived::Scalar(2) * cm_natural).eval();
}

template <typename Derived>
auto cm_to_natural(const Eigen::MatrixBase<Derived>& cm_snu) {
  return (typename Derived::Scalar(0.5) * cm_snu).eval();
}

/// Throws unless the state has a symmetric, physical covariance matrix with
/// positive-definite diagonal blocks.
template <typename Scalar>
void validate_state(const GaussianState<Scalar>& state) {
  const auto& cm = state.cm;
  const Scalar scale = std::max(Scalar(1), cm.cwiseAbs().maxCoeff());
  if (!cm.allFinite() ||
      (cm - cm.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale) {
    throw unphysical_state_error("covariance matrix not symmetric: " +
                                 state.label);
  }
  for (Mode m : {Mode::A, Mode::B}) {
    const auto blk = state.block(m);
    if (!(blk(0, 0) > Scalar(0)) || !(blk.determinant() > Scalar(0))) {
      throw unphysical_state_error(std::string("diagonal block ") +
                                   mode_name(m) +
                                   " not positive definite: " + state.label);
    }
  }
  const auto nu = symplectic_eigenvalues(cm);
  if (nu[1] < Scalar(0.5) - physicality_tol(cm)) {
    std::ostringstream msg;
    msg << "state violates the uncertainty bound (nu_min = " << nu[1]
        << "): " << state.label;
    throw unphysical_state_error(msg.str());
  }
}

/// Two-mode squeezed vacuum with squeezing parameter r >= 0:
/// cm = 1/2 [[cosh(2r) I, sinh(2r) Z], [sinh(2r) Z, cosh(2r) I]].
template <typename Scalar = double>
GaussianState<Scalar> make_tmsv(Scalar r) {
  if (!(r >= Scalar(0)) || r > Scalar(10)) {
    std::ostringstream msg;
    msg << "tmsv squeezing parameter must lie in [0, 10], got " << r;
    throw invalid_parameter_error(msg.str());
  }
  const Scalar c = std::cosh(Scalar(2) * r) / Scalar(2);
  const Scalar s = std::sinh(Scalar(2) * r) / Scalar(2);
  GaussianState<Scalar> state;
  state.cm.setZero();
  state.cm(0, 0) = state.cm(1, 1) = state.cm(2, 2) = state.cm(3, 3) = c;
  state.cm(0, 2) = state.cm(2, 0) = s;
  state.cm(1, 3) = state.cm(3, 1) = -s;
  std::ostringstream label;
  label << "tmsv(r=" << double(r) << ")";
  state.label = label.str();
  return state;
}

/// EPR state from two amplitude-squeezed beams (variances in SNU, one
/// squeezed in x, one in p) combined on a 50:50 beam-splitter with the
/// relative phase locked in quadrature. The sign of mode B is fixed so the
/// x-quadrature correlation is positive; for minimum-uncertainty squeezers
/// this reproduces make_tmsv entrywise.
template <typename Scalar = double>
GaussianState<Scalar> make_epr_from_squeezers(Scalar v_sq, Scalar v_anti) {
  if (!(v_sq > Scalar(0)) || !(v_sq <= Scalar(1)) || !(v_anti >= Scalar(1))) {
    std::ostringstream msg;
    msg << "squeezer variances must satisfy 0 < v_sq <= 1 <= v_anti, got ("
        << v_sq << ", " << v_anti << ")";
    throw invalid_parameter_error(msg.str());
  }
  if (v_sq * v_anti < Scalar(1) - Scalar(1e-12)) {
    std::ostringstream msg;
    msg << "squeezer pair violates the uncertainty product: " << v_sq << " * "
        << v_anti << " < 1";
    throw unphysical_state_error(msg.str());
  }
  // Beam-splitter outputs of independent squeezers: each output quadrature
  // variance is the average of the inputs, the cross term their half
  // difference. SNU inputs carry a factor 1/2 into natural units.
  const Scalar diag = (v_sq + v_anti) / Scalar(4);
  const Scalar cross = (v_anti - v_sq) / Scalar(4);
  GaussianState<Scalar> state;
  state.cm.setZero();
  state.cm(0, 0) = state.cm(1, 1) = state.cm(2, 2) = state.cm(3, 3) = diag;
  state.cm(0, 2) = state.cm(2, 0) = cross;
  state.cm(1, 3) = state.cm(3, 1) = -cross;
  std::ostringstream label;
  label << "epr(v_sq=" << double(v_sq) << ", v_anti=" << double(v_anti) << ")";
  state.label = label.str();
  return state;
}

/// Pure-loss / thermal channel on one arm: the mode's rows and columns scale
/// by sqrt(T) and its diagonal block gains (1-T)(n_th + 1/2) I.
template <typename Scalar>
GaussianState<Scalar> apply_loss(const GaussianState<Scalar>& state, Mode mode,
                                 Scalar transmissivity,
                                 Scalar n_thermal = Scalar(0)) {
  if (!(transmissivity >= Scalar(0)) || !(transmissivity <= Scalar(1))) {
    std::ostringstream msg;
    msg << "transmissivity must lie in [0, 1], got " << transmissivity;
    throw invalid_parameter_error(msg.str());
  }
  if (!(n_thermal >= Scalar(0))) {
    std::ostringstream msg;
    msg << "mean thermal photon number must be >= 0, got " << n_thermal;
    throw invalid_parameter_error(msg.str());
  }
  validate_state(state);

  const int o = mode == Mode::A ? 0 : 2;
  const Scalar root_t = std::sqrt(transmissivity);
  GaussianState<Scalar> out = state;
  out.cm.middleRows(o, 2) *= root_t;
  out.cm.middleCols(o, 2) *= root_t;
  const Scalar added =
      (Scalar(1) - transmissivity) * (n_thermal + Scalar(0.5));
  out.cm(o, o) += added;
  out.cm(o + 1, o + 1) += added;
  out.mean.segment(o, 2) *= root_t;
  std::ostringstream label;
  label << state.label << " -> loss(" << mode_name(mode)
        << ", T=" << double(transmissivity) << ", n_th=" << double(n_thermal)
        << ")";
  out.label = label.str();
  return out;
}

/// Purity of the two-mode state, 1/(4 sqrt(det cm)) in natural units.
/// Evaluated as 1/(4 nu1 nu2) through the symplectic spectrum, which stays
/// accurate where the direct determinant of a strongly squeezed state
/// cancels catastrophically.
template <typename Scalar>
Scalar purity(const GaussianState<Scalar>& state) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 4, 4>> es(state.cm);
  if (es.info() != Eigen::Success || !(es.eigenvalues()(0) > Scalar(0))) {
    throw unphysical_state_error(
        "two-mode covariance determinant not positive: " + state.label);
  }
  const auto nu = symplectic_eigenvalues(state.cm);
  return Scalar(1) / (Scalar(4) * nu[0] * nu[1]);
}

/// Purity of a single-mode marginal, 1/(2 sqrt(det block)).
template <typename Scalar>
Scalar purity(const Eigen::Matrix<Scalar, 2, 2>& cm) {
  const Scalar det = cm.determinant();
  if (!(det > Scalar(0))) {
    throw unphysical_state_error(
        "single-mode covariance determinant not positive");
  }
  return Scalar(1) / (Scalar(2) * std::sqrt(det));
}

}  // namespace mbnla
