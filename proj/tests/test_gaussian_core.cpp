#include <cmath>

#include "doctest.h"
#include "mbnla/gaussian.hpp"
#include "mbnla/rng.hpp"
#include "mbnla/symplectic.hpp"
#include "oracles.hpp"

using namespace mbnla;

namespace {

// A physical random covariance matrix: random SPD rescaled so its smallest
// symplectic eigenvalue sits a margin above 1/2.
Eigen::Matrix4d random_physical_cm(uint64_t seed, double margin = 1.2) {
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i) {
    const auto z = to_normal_pair(rng_block(seed, Stream::Measurement, i, 0));
    const auto w = to_normal_pair(rng_block(seed, Stream::Measurement, i, 1));
    m.row(i) << z[0], z[1], w[0], w[1];
  }
  Eigen::Matrix4d spd = m * m.transpose() + 0.1 * Eigen::Matrix4d::Identity();
  const auto nu = symplectic_eigenvalues<double>(spd);
  return spd * (0.5 * margin / nu[1]);
}

}  // namespace

TEST_CASE("tmsv constructor matches the hyperbolic closed form") {
  const auto vac = make_tmsv(0.0);
  CHECK((vac.cm - 0.5 * Eigen::Matrix4d::Identity()).norm() == 0.0);

  const double r = 0.5;
  const auto state = make_tmsv(r);
  const double diag = std::cosh(2.0 * r) / 2.0;  // 0.77154...
  const double off = std::sinh(2.0 * r) / 2.0;
  CHECK(state.cm(0, 0) == doctest::Approx(diag).epsilon(1e-15));
  CHECK(state.cm(0, 0) == doctest::Approx(0.7715403).epsilon(1e-6));
  CHECK(state.cm(2, 2) == doctest::Approx(diag).epsilon(1e-15));
  CHECK(state.cm(0, 2) == doctest::Approx(off).epsilon(1e-15));
  CHECK(state.cm(1, 3) == doctest::Approx(-off).epsilon(1e-15));
  CHECK(state.cm(0, 1) == 0.0);
  CHECK(state.cm(0, 3) == 0.0);
  validate_state(state);
}

TEST_CASE("tmsv states are pure for every squeezing") {
  for (double r : {0.0, 0.1, 0.452, 1.0, 2.5}) {
    CHECK(purity(make_tmsv(r)) == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Extreme squeezing: purity conditioning versus the stored matrix grows as
  // exp(4r)*eps, so 1e-9 is unreachable from doubles past r ~ 4.
  CHECK(purity(make_tmsv(5.0)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("tmsv rejects out-of-range squeezing") {
  CHECK_THROWS_AS(make_tmsv(-0.1), invalid_parameter_error);
  CHECK_THROWS_AS(make_tmsv(10.5), invalid_parameter_error);
  CHECK_THROWS_AS(make_tmsv(std::nan("")), invalid_parameter_error);
}

TEST_CASE("squeezer pair reduces to tmsv at the uncertainty limit") {
  const auto vac = make_epr_from_squeezers(1.0, 1.0);
  CHECK((vac.cm - 0.5 * Eigen::Matrix4d::Identity()).norm() < 1e-15);

  for (double r : {0.2, 0.5, 1.1}) {
    const auto from_squeezers =
        make_epr_from_squeezers(std::exp(-2.0 * r), std::exp(2.0 * r));
    const auto direct = make_tmsv(r);
    CHECK((from_squeezers.cm - direct.cm).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("impure squeezer pair is physical with purity below one") {
  const auto state = make_epr_from_squeezers(0.5, 2.5);
  validate_state(state);
  const auto nu = symplectic_eigenvalues<double>(state.cm);
  CHECK(nu[1] >= 0.5 - 1e-9);
  CHECK(purity(state) < 1.0);
  // Purity against the independent determinant expansion.
  CHECK(purity(state) ==
        doctest::Approx(1.0 / (4.0 * std::sqrt(oracle::leibniz_det4(state.cm))))
            .epsilon(1e-12));
}

TEST_CASE("squeezer pair rejects invalid and unphysical inputs") {
  CHECK_THROWS_AS(make_epr_from_squeezers(0.0, 2.0), invalid_parameter_error);
  CHECK_THROWS_AS(make_epr_from_squeezers(1.2, 2.0), invalid_parameter_error);
  CHECK_THROWS_AS(make_epr_from_squeezers(0.5, 0.9), invalid_parameter_error);
  // 0 < v_sq <= 1 <= v_anti but v_sq * v_anti < 1: uncertainty violation.
  CHECK_THROWS_AS(make_epr_from_squeezers(0.5, 1.5), unphysical_state_error);
}

TEST_CASE("loss channel fixed points and the direct map") {
  const auto state = make_tmsv(0.5);

  const auto untouched = apply_loss(state, Mode::B, 1.0, 0.0);
  CHECK((untouched.cm - state.cm).cwiseAbs().maxCoeff() < 1e-15);

  const auto severed = apply_loss(state, Mode::B, 0.0, 0.0);
  CHECK((severed.block(Mode::B) - 0.5 * Eigen::Matrix2d::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  CHECK(severed.cross().cwiseAbs().maxCoeff() == 0.0);
  CHECK((severed.block(Mode::A) - state.block(Mode::A)).cwiseAbs().maxCoeff() ==
        0.0);

  const auto half = apply_loss(state, Mode::B, 0.5, 0.0);
  const double expected = 0.5 * std::cosh(1.0) / 2.0 + 0.5 * 0.5;  // 0.63577
  CHECK(half.cm(2, 2) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(half.cm(2, 2) == doctest::Approx(0.63577).epsilon(1e-4));
  CHECK(half.cm(0, 2) ==
        doctest::Approx(std::sqrt(0.5) * state.cm(0, 2)).epsilon(1e-15));
}

TEST_CASE("loss channels compose: T1 then T2 equals T1*T2") {
  const auto state = make_epr_from_squeezers(0.6, 2.2);
  for (double t1 : {0.9, 0.5, 0.17}) {
    for (double t2 : {0.8, 0.33}) {
      const auto seq = apply_loss(apply_loss(state, Mode::B, t1), Mode::B, t2);
      const auto direct = apply_loss(state, Mode::B, t1 * t2);
      CHECK((seq.cm - direct.cm).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("loss never increases purity on a correlated mode") {
  const auto state = make_tmsv(0.8);
  double last = purity(state);
  for (double t : {0.9, 0.7, 0.5, 0.3}) {
    const double p = purity(apply_loss(state, Mode::B, t));
    CHECK(p <= last + 1e-12);
    last = p;
  }
}

TEST_CASE("loss parameter validation") {
  const auto state = make_tmsv(0.3);
  CHECK_THROWS_AS(apply_loss(state, Mode::B, -0.1), invalid_parameter_error);
  CHECK_THROWS_AS(apply_loss(state, Mode::B, 1.1), invalid_parameter_error);
  CHECK_THROWS_AS(apply_loss(state, Mode::B, 0.5, -1.0),
                  invalid_parameter_error);
}

TEST_CASE("symplectic eigenvalues: vacuum, pure states, invariant oracle") {
  const auto vac_nu = symplectic_eigenvalues<double>(
      (0.5 * Eigen::Matrix4d::Identity()).eval());
  CHECK(vac_nu[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(vac_nu[1] == doctest::Approx(0.5).epsilon(1e-12));

  for (double r : {0.3, 0.9, 1.7}) {
    const auto nu = symplectic_eigenvalues<double>(make_tmsv(r).cm);
    CHECK(nu[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(nu[1] == doctest::Approx(0.5).epsilon(1e-9));
  }

  // Lossy and thermal states against the standard-form invariant formula.
  for (uint64_t seed : {11u, 12u, 13u}) {
    const auto cm = random_physical_cm(seed);
    const auto nu = symplectic_eigenvalues<double>(cm);
    const auto ref = oracle::nu_from_invariants(cm);
    CHECK(nu[0] == doctest::Approx(ref[0]).epsilon(1e-9));
    CHECK(nu[1] == doctest::Approx(ref[1]).epsilon(1e-9));
  }
  const auto lossy = apply_loss(make_tmsv(0.5), Mode::B, 0.5, 0.3);
  const auto nu = symplectic_eigenvalues<double>(lossy.cm);
  const auto ref = oracle::nu_from_invariants(lossy.cm);
  CHECK(nu[0] == doctest::Approx(ref[0]).epsilon(1e-12));
  CHECK(nu[1] == doctest::Approx(ref[1]).epsilon(1e-12));
}

TEST_CASE("entropy closed forms") {
  CHECK(von_neumann_entropy<double>(
            (0.5 * Eigen::Matrix4d::Identity()).eval()) ==
        doctest::Approx(0.0).epsilon(1e-12));
  for (double r : {0.2, 0.452, 1.0}) {
    CHECK(von_neumann_entropy<double>(make_tmsv(r).cm) < 1e-9);
  }
  // Single thermal mode with one mean photon: G(1) = 2 bits.
  const Eigen::Matrix2d thermal = 1.5 * Eigen::Matrix2d::Identity();
  CHECK(von_neumann_entropy<double>(thermal) ==
        doctest::Approx(2.0).epsilon(1e-9));
  // Additivity over uncorrelated modes.
  Eigen::Matrix4d product = Eigen::Matrix4d::Zero();
  product.block<2, 2>(0, 0) = 1.5 * Eigen::Matrix2d::Identity();
  product.block<2, 2>(2, 2) = 2.5 * Eigen::Matrix2d::Identity();
  CHECK(von_neumann_entropy<double>(product) ==
        doctest::Approx(von_neumann_entropy<double>(
                            (1.5 * Eigen::Matrix2d::Identity()).eval()) +
                        von_neumann_entropy<double>(
                            (2.5 * Eigen::Matrix2d::Identity()).eval()))
            .epsilon(1e-12));
}

TEST_CASE("entropy is monotone in each symplectic eigenvalue") {
  double last = -1.0;
  for (double x = 0.0; x < 3.0; x += 0.05) {
    const double g = gaussian_entropy_g(x);
    CHECK(g > last);
    last = g;
  }
}

TEST_CASE("entropy rejects sub-vacuum spectra beyond tolerance") {
  const Eigen::Matrix2d squeezed_marginal = 0.3 * Eigen::Matrix2d::Identity();
  CHECK_THROWS_AS(von_neumann_entropy<double>(squeezed_marginal),
                  unphysical_state_error);
}

TEST_CASE("williamson form reconstructs and is symplectic") {
  const Eigen::Matrix4d omega = symplectic_form<double>();
  auto check_form = [&](const Eigen::Matrix4d& cm) {
    const auto form = williamson(cm);
    Eigen::Matrix4d d = Eigen::Matrix4d::Zero();
    d(0, 0) = d(1, 1) = form.nu[0];
    d(2, 2) = d(3, 3) = form.nu[1];
    const Eigen::Matrix4d rebuilt =
        form.symplectic * d * form.symplectic.transpose();
    CHECK((rebuilt - cm).cwiseAbs().maxCoeff() < 1e-9);
    const Eigen::Matrix4d o =
        form.symplectic * omega * form.symplectic.transpose();
    CHECK((o - omega).cwiseAbs().maxCoeff() < 1e-9);
    const auto nu = symplectic_eigenvalues<double>(cm);
    CHECK(form.nu[0] == doctest::Approx(nu[0]).epsilon(1e-9));
    CHECK(form.nu[1] == doctest::Approx(nu[1]).epsilon(1e-9));
  };

  check_form(0.5 * Eigen::Matrix4d::Identity());  // degenerate spectrum
  check_form(make_tmsv(0.7).cm);
  check_form(apply_loss(make_tmsv(0.5), Mode::B, 0.4, 0.2).cm);
  for (uint64_t seed : {21u, 22u, 23u, 24u}) {
    check_form(random_physical_cm(seed));
  }
}

TEST_CASE("physicality projection clips the symplectic spectrum") {
  const auto good = make_tmsv(0.5).cm;
  const auto untouched = project_to_physical<double>(good);
  CHECK_FALSE(untouched.clipped);
  CHECK(untouched.distance == 0.0);

  const Eigen::Matrix4d bad = 0.9 * good;  // nu_min < 1/2
  const auto fixed = project_to_physical<double>(bad);
  CHECK(fixed.clipped);
  CHECK(fixed.distance > 0.0);
  const auto nu = symplectic_eigenvalues<double>(fixed.cm);
  CHECK(nu[1] >= 0.5 - 2e-9);
  // Projection is idempotent.
  const auto again = project_to_physical<double>(fixed.cm);
  CHECK(again.distance < 1e-9);
}

TEST_CASE("validate_state rejects asymmetric and unphysical matrices") {
  GaussianState<double> state = make_tmsv(0.4);
  state.cm(0, 2) += 1e-6;
  CHECK_THROWS_AS(validate_state(state), unphysical_state_error);

  GaussianState<double> squeezed;
  squeezed.cm = 0.2 * Eigen::Matrix4d::Identity();
  CHECK_THROWS_AS(validate_state(squeezed), unphysical_state_error);
}

TEST_CASE("snu conversion round-trips") {
  const auto cm = make_tmsv(0.6).cm;
  CHECK((cm_to_natural(cm_to_snu(cm)) - cm).cwiseAbs().maxCoeff() == 0.0);
  CHECK(cm_to_snu(cm)(0, 0) == doctest::Approx(std::cosh(1.2)).epsilon(1e-15));
}
