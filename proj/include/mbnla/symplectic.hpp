#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "mbnla/diagnostics.hpp"
#include "mbnla/errors.hpp"

namespace mbnla {

// Symplectic spectra and Gaussian entropies for one- and two-mode covariance
// matrices in natural units (vacuum quadrature variance 1/2). Quadrature
// ordering is (x_A, p_A, x_B, p_B).

/// Tolerance below 1/2 still accepted for symplectic eigenvalues of physical
/// states; finite-sample estimates are projected before entropy evaluation.
inline constexpr double kPhysicalityTol = 1e-9;

/// Physicality tolerance widened with the matrix magnitude: an eigensolve on
/// a covariance of norm s carries O(eps * s) absolute round-off, which
/// exceeds the nominal 1e-9 for strongly squeezed states.
template <typename Scalar, int N>
Scalar physicality_tol(const Eigen::Matrix<Scalar, N, N>& cm,
                       Scalar tol = Scalar(kPhysicalityTol)) {
  const Scalar scale = cm.cwiseAbs().maxCoeff();
  return std::max(
      tol, Scalar(1000) * std::numeric_limits<Scalar>::epsilon() * scale);
}

/// Block-diagonal symplectic form, [[0,1],[-1,0]] per mode.
template <typename Scalar = double>
Eigen::Matrix<Scalar, 4, 4> symplectic_form() {
  Eigen::Matrix<Scalar, 4, 4> omega = Eigen::Matrix<Scalar, 4, 4>::Zero();
  omega(0, 1) = Scalar(1);
  omega(1, 0) = Scalar(-1);
  omega(2, 3) = Scalar(1);
  omega(3, 2) = Scalar(-1);
  return omega;
}

/// Symplectic eigenvalue of a single-mode covariance matrix: sqrt(det cm).
template <typename Scalar>
Scalar symplectic_eigenvalue(const Eigen::Matrix<Scalar, 2, 2>& cm) {
  const Scalar det = cm.determinant();
  if (!(det > Scalar(0))) {
    throw unphysical_state_error(
        "single-mode covariance matrix has non-positive determinant");
  }
  return std::sqrt(det);
}

/// Symplectic eigenvalues of a two-mode covariance matrix, i.e. |eig(i Omega
/// cm)|, sorted descending. Physical states satisfy nu >= 1/2.
///
/// For positive-definite input the spectrum comes from the Hermitian matrix
/// i K Omega K with K = cm^{1/2}, which is similar to i Omega cm; the
/// self-adjoint solve keeps small eigenvalues of strongly squeezed states far
/// more accurate than a general eigensolve. Indefinite input falls back to
/// the general solver so unphysical matrices still get a diagnostic.
template <typename Scalar>
std::array<Scalar, 2> symplectic_eigenvalues(
    const Eigen::Matrix<Scalar, 4, 4>& cm) {
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
  using Complex = std::complex<Scalar>;
  using Matrix4c = Eigen::Matrix<Complex, 4, 4>;

  Eigen::SelfAdjointEigenSolver<Matrix4> es(cm);
  if (es.info() == Eigen::Success && es.eigenvalues()(0) > Scalar(0)) {
    const Matrix4 root = es.operatorSqrt();
    const Matrix4 a = root * symplectic_form<Scalar>() * root;
    Matrix4c h = Complex(0, 1) * a.template cast<Complex>();
    h = Scalar(0.5) * (h + h.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix4c> hs(h);
    if (hs.info() != Eigen::Success) {
      throw numeric_error("symplectic eigensolve did not converge");
    }
    const auto ev = hs.eigenvalues();  // ascending: -nu1, -nu2, nu2, nu1
    return {(ev(3) - ev(0)) / Scalar(2), (ev(2) - ev(1)) / Scalar(2)};
  }

  const Matrix4 m = symplectic_form<Scalar>() * cm;
  Eigen::EigenSolver<Matrix4> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("symplectic eigensolve did not converge");
  }
  const auto eig = solver.eigenvalues();
  const Scalar scale = std::max(Scalar(1), cm.cwiseAbs().maxCoeff());
  std::array<Scalar, 4> mags{};
  for (int i = 0; i < 4; ++i) {
    // Omega*cm for symmetric cm has purely imaginary spectrum +-i nu.
    if (std::abs(eig(i).real()) > Scalar(1e-7) * scale) {
      std::ostringstream msg;
      msg << "symplectic spectrum not purely imaginary; eigenvalue "
          << eig(i).real() << " + " << eig(i).imag() << "i at scale " << scale;
      throw numeric_error(msg.str());
    }
    mags[i] = std::abs(eig(i).imag());
  }
  std::sort(mags.begin(), mags.end(), std::greater<Scalar>());
  return {(mags[0] + mags[1]) / Scalar(2), (mags[2] + mags[3]) / Scalar(2)};
}

/// G(x) = (x+1) log2(x+1) - x log2 x, the entropy of a thermal mode holding
/// x mean photons. G(0) = 0.
template <typename Scalar>
Scalar gaussian_entropy_g(Scalar x) {
  if (x <= Scalar(0)) return Scalar(0);
  return (x + Scalar(1)) * std::log2(x + Scalar(1)) - x * std::log2(x);
}

namespace detail {

template <typename Scalar>
Scalar entropy_from_nu(Scalar nu) {
  Scalar photons = nu - Scalar(0.5);
  if (photons < Scalar(0)) {
    if (photons < -Scalar(kPhysicalityTol)) {
      std::ostringstream msg;
      msg << "symplectic eigenvalue " << nu << " below vacuum";
      throw unphysical_state_error(msg.str());
    }
    diag_counters().entropy_clamps++;
    photons = Scalar(0);
  }
  return gaussian_entropy_g(photons);
}

}  // namespace detail

/// Von Neumann entropy in bits of the Gaussian state with the given two-mode
/// covariance matrix: sum of G(nu_k - 1/2) over the symplectic spectrum.
template <typename Scalar>
Scalar von_neumann_entropy(const Eigen::Matrix<Scalar, 4, 4>& cm) {
  const auto nu = symplectic_eigenvalues(cm);
  return detail::entropy_from_nu(nu[0]) + detail::entropy_from_nu(nu[1]);
}

/// Single-mode variant.
template <typename Scalar>
Scalar von_neumann_entropy(const Eigen::Matrix<Scalar, 2, 2>& cm) {
  return detail::entropy_from_nu(symplectic_eigenvalue(cm));
}

/// Whether every symplectic eigenvalue is >= 1/2 - tol and the matrix is
/// positive definite.
template <typename Scalar>
bool is_physical(const Eigen::Matrix<Scalar, 4, 4>& cm,
                 Scalar tol = Scalar(kPhysicalityTol)) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, 4, 4>> es(cm);
  if (es.info() != Eigen::Success || es.eigenvalues()(0) <= Scalar(0)) {
    return false;
  }
  const auto nu = symplectic_eigenvalues(cm);
  return nu[1] >= Scalar(0.5) - physicality_tol(cm, tol);
}

/// Williamson normal form: cm = S * diag(nu1, nu1, nu2, nu2) * S^T with S
/// symplectic. Requires cm positive definite.
template <typename Scalar>
struct WilliamsonForm {
  Eigen::Matrix<Scalar, 4, 4> symplectic;
  std::array<Scalar, 2> nu;
};

template <typename Scalar>
WilliamsonForm<Scalar> williamson(const Eigen::Matrix<Scalar, 4, 4>& cm) {
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;

  Eigen::SelfAdjointEigenSolver<Matrix4> es(cm);
  if (es.info() != Eigen::Success) {
    throw numeric_error("eigendecomposition failed in Williamson form");
  }
  if (es.eigenvalues()(0) <= Scalar(0)) {
    throw unphysical_state_error(
        "covariance matrix not positive definite; cannot take Williamson form");
  }
  const Matrix4 root = es.operatorSqrt();
  const Matrix4 inv_root = es.operatorInverseSqrt();

  // K = cm^{-1/2} Omega cm^{-1/2} is antisymmetric; its real Schur form is
  // block diagonal with blocks [[0, 1/nu], [-1/nu, 0]].
  const Matrix4 k = inv_root * symplectic_form<Scalar>() * inv_root;
  Eigen::RealSchur<Matrix4> schur(k);
  if (schur.info() != Eigen::Success) {
    throw numeric_error("Schur decomposition failed in Williamson form");
  }
  Matrix4 q = schur.matrixU();
  Matrix4 t = schur.matrixT();

  std::array<Scalar, 2> mu{};
  for (int b = 0; b < 2; ++b) {
    const int c = 2 * b;
    Scalar off = t(c, c + 1);
    if (std::abs(off) < Scalar(1e-14)) {
      throw numeric_error("degenerate Schur block in Williamson form");
    }
    if (off < Scalar(0)) {
      q.col(c).swap(q.col(c + 1));
      off = -off;
    }
    mu[b] = off;
  }
  // mu = 1/nu; order modes so nu comes out descending.
  if (mu[0] > mu[1]) {
    q.col(0).swap(q.col(2));
    q.col(1).swap(q.col(3));
    std::swap(mu[0], mu[1]);
  }

  WilliamsonForm<Scalar> form;
  form.nu = {Scalar(1) / mu[0], Scalar(1) / mu[1]};
  Matrix4 scale = Matrix4::Identity();
  scale(0, 0) = scale(1, 1) = Scalar(1) / std::sqrt(form.nu[0]);
  scale(2, 2) = scale(3, 3) = Scalar(1) / std::sqrt(form.nu[1]);
  form.symplectic = root * q * scale;
  return form;
}

/// Result of projecting an estimated covariance matrix onto the physical set
/// by clipping its symplectic spectrum at 1/2. Carries the clipped spectrum
/// so that downstream entropies need not re-derive it from the (rounded)
/// reconstruction.
template <typename Scalar>
struct PhysicalProjection {
  Eigen::Matrix<Scalar, 4, 4> cm;
  std::array<Scalar, 2> nu{Scalar(0.5), Scalar(0.5)};
  Scalar distance = Scalar(0);  // Frobenius norm of the applied correction
  bool clipped = false;
};

/// Projects cm to the nearest state with symplectic spectrum >= 1/2 by
/// clipping in the Williamson basis. Indefinite inputs are first nudged onto
/// the positive-definite cone. The projection distance is logged.
template <typename Scalar>
PhysicalProjection<Scalar> project_to_physical(
    const Eigen::Matrix<Scalar, 4, 4>& cm,
    Scalar tol = Scalar(kPhysicalityTol)) {
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;
  PhysicalProjection<Scalar> result;
  result.cm = Scalar(0.5) * (cm + cm.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix4> es(result.cm);
  if (es.info() != Eigen::Success) {
    throw numeric_error("eigendecomposition failed in physicality projection");
  }
  if (es.eigenvalues()(0) < Scalar(1e-12)) {
    Eigen::Matrix<Scalar, 4, 1> lifted =
        es.eigenvalues().cwiseMax(Scalar(1e-12));
    result.cm =
        es.eigenvectors() * lifted.asDiagonal() * es.eigenvectors().transpose();
    result.clipped = true;
  }

  const auto nu = symplectic_eigenvalues(result.cm);
  result.nu = nu;
  if (nu[1] >= Scalar(0.5) - tol && !result.clipped) {
    return result;  // already physical, identity projection
  }
  if (nu[1] < Scalar(0.5)) {
    auto form = williamson(result.cm);
    Matrix4 d = Matrix4::Zero();
    d(0, 0) = d(1, 1) = std::max(form.nu[0], Scalar(0.5));
    d(2, 2) = d(3, 3) = std::max(form.nu[1], Scalar(0.5));
    result.nu = {d(0, 0), d(2, 2)};
    result.cm = form.symplectic * d * form.symplectic.transpose();
    result.cm = Scalar(0.5) * (result.cm + result.cm.transpose());
    result.clipped = true;
  }
  if (result.clipped) {
    result.distance = (result.cm - cm).norm();
    diag_counters().physicality_projections++;
    std::ostringstream msg;
    msg << "projected estimated covariance to physical set, distance "
        << result.distance;
    note(msg.str());
  }
  return result;
}

}  // namespace mbnla
