#include <cmath>

#include "doctest.h"
#include "mbnla/criteria.hpp"
#include "mbnla/nla.hpp"
#include "oracles.hpp"

using namespace mbnla;

namespace {

Eigen::Matrix4d lossy_tmsv_snu(double v_snu, double t) {
  Eigen::Matrix4d cm = Eigen::Matrix4d::Zero();
  cm(0, 0) = cm(1, 1) = v_snu;
  cm(2, 2) = cm(3, 3) = t * v_snu + 1.0 - t;
  const double c = std::sqrt(t) * std::sqrt(v_snu * v_snu - 1.0);
  cm(0, 2) = cm(2, 0) = c;
  cm(1, 3) = cm(3, 1) = -c;
  return cm;
}

Eigen::Matrix4d swap_parties(const Eigen::Matrix4d& cm) {
  Eigen::Matrix4d out;
  out.block<2, 2>(0, 0) = cm.block<2, 2>(2, 2);
  out.block<2, 2>(2, 2) = cm.block<2, 2>(0, 0);
  out.block<2, 2>(0, 2) = cm.block<2, 2>(2, 0);
  out.block<2, 2>(2, 0) = cm.block<2, 2>(0, 2);
  return out;
}

}  // namespace

TEST_CASE("covariance reconstruction: vacuum and tmsv patterns") {
  const uint64_t n = 1 << 20;
  {
    const auto rec = sample_shots(make_tmsv(0.0), n, 17);
    const auto est = reconstruct_cm(rec);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        const double target = i == j ? 1.0 : 0.0;
        if (est.se(i, j) > 0) {
          CHECK(std::abs(est.cm(i, j) - target) < 4 * est.se(i, j));
        } else {
          CHECK(est.cm(i, j) == 0.0);  // standard form zeros
        }
      }
    }
  }
  {
    const double r = 0.5;
    const auto rec = sample_shots(make_tmsv(r), n, 18);
    const auto est = reconstruct_cm(rec);
    const double v = std::cosh(2.0 * r);
    const double c = std::sinh(2.0 * r);
    CHECK(std::abs(est.cm(0, 0) - v) < 4 * est.se(0, 0));
    CHECK(std::abs(est.cm(2, 2) - v) < 4 * est.se(2, 2));
    CHECK(std::abs(est.cm(0, 2) - c) < 4 * est.se(0, 2));
    CHECK(std::abs(est.cm(1, 3) + c) < 4 * est.se(1, 3));
  }
}

TEST_CASE("unfiltered and gain-one-filtered records reconstruct identically") {
  const auto rec = sample_shots(make_tmsv(0.4), 4096, 5);
  const auto filtered = apply_mbnla(rec, FilterSpec{1.0, 2.5}, 9);
  const auto a = reconstruct_cm(rec);
  const auto b = reconstruct_cm(filtered.record);
  CHECK((a.cm - b.cm).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reconstruction demands enough shots per quadrature") {
  const auto rec = sample_shots(make_tmsv(0.3), 150, 3);
  CHECK_THROWS_AS(reconstruct_cm(rec), invalid_parameter_error);
}

TEST_CASE("reconstruction flags unphysical deconvolved estimates") {
  // Bob outcomes with variance far below the heterodyne floor of 1/2.
  MeasurementRecord rec;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    rec.alice_quad.push_back(uint8_t(i % 2));
    rec.alice.push_back((i % 7 - 3) * 0.4);
    rec.bob_x.push_back((i % 5 - 2) * 0.05);
    rec.bob_p.push_back((i % 3 - 1) * 0.05);
  }
  CHECK_THROWS_AS(reconstruct_cm(rec), numeric_error);
}

TEST_CASE("reid criterion closed forms") {
  const Eigen::Matrix4d eye = Eigen::Matrix4d::Identity();
  const auto flat = reid_epr<double>(eye);
  CHECK(flat.direct == 1.0);
  CHECK(flat.reverse == 1.0);

  for (double r : {0.2, 0.452, 0.9}) {
    const auto snu = cm_to_snu(make_tmsv(r).cm);
    const auto reid = reid_epr<double>(snu);
    const double v = std::cosh(2.0 * r);
    CHECK(reid.direct == doctest::Approx(1.0 / (v * v)).epsilon(1e-12));
    CHECK(reid.reverse == doctest::Approx(1.0 / (v * v)).epsilon(1e-12));
    CHECK(reid.v_xa_xb == doctest::Approx(1.0 / v).epsilon(1e-12));
  }

  // The paper-matched state: V chosen so the pure-state criterion is 0.484.
  const double v_matched = 1.0 / std::sqrt(0.484);
  const double r_matched = 0.5 * std::acosh(v_matched);
  const auto reid =
      reid_epr<double>(cm_to_snu(make_tmsv(r_matched).cm));
  CHECK(reid.direct == doctest::Approx(0.484).epsilon(1e-12));

  Eigen::Matrix4d degenerate = eye;
  degenerate(2, 2) = 0.0;
  CHECK_THROWS_AS(reid_epr<double>(degenerate), numeric_error);
}

TEST_CASE("duan criterion closed forms and properties") {
  CHECK(duan_inseparability<double>(Eigen::Matrix4d::Identity()) ==
        doctest::Approx(1.0).epsilon(1e-12));

  for (double r : {0.2, 0.5, 1.0}) {
    const auto snu = cm_to_snu(make_tmsv(r).cm);
    CHECK(duan_inseparability<double>(snu) ==
          doctest::Approx(std::exp(-2.0 * r)).epsilon(1e-12));
    // Symmetric state: lambda = 1 is optimal.
    CHECK(duan_inseparability_at_lambda<double>(snu, 1.0) ==
          doctest::Approx(std::exp(-2.0 * r)).epsilon(1e-12));
  }

  // Fully broken channel leaves a product state at the boundary.
  const auto severed = cm_to_snu(apply_loss(make_tmsv(0.7), Mode::B, 0.0).cm);
  CHECK(duan_inseparability<double>(severed) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Forced lambda = 1 upper-bounds the optimized value.
  for (double t : {0.9, 0.6, 0.3}) {
    const auto snu = cm_to_snu(apply_loss(make_tmsv(0.6), Mode::B, t).cm);
    CHECK(duan_inseparability<double>(snu) <=
          duan_inseparability_at_lambda<double>(snu, 1.0) + 1e-12);
  }
}

TEST_CASE("duan matches a direct numeric minimization") {
  for (double t : {0.8, 0.5, 0.25}) {
    for (double v : {1.4374, 3.0, 10.0}) {
      const auto snu = lossy_tmsv_snu(v, t);
      const double closed = duan_inseparability<double>(snu);
      const double numeric = oracle::golden_minimize(
          [&](double lambda) {
            return duan_inseparability_at_lambda<double>(snu, lambda);
          },
          1e-3, 1e3);
      CHECK(closed == doctest::Approx(numeric).epsilon(1e-9));
    }
  }
}

TEST_CASE("criteria are invariant under exchanging the parties") {
  const auto snu = lossy_tmsv_snu(2.5, 0.6);
  const auto swapped = swap_parties(snu);
  const auto a = reid_epr<double>(snu);
  const auto b = reid_epr<double>(swapped);
  CHECK(a.direct == b.reverse);
  CHECK(a.reverse == b.direct);
  CHECK(duan_inseparability<double>(snu) ==
        doctest::Approx(duan_inseparability<double>(swapped)).epsilon(1e-14));
}

TEST_CASE("perfect EPR bound limits and oracle") {
  CHECK(perfect_epr_bound(1.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(perfect_epr_bound(1e-6) == doctest::Approx(1.0).epsilon(1e-4));

  // Against a direct minimization at V = 1e6 SNU and the analytic limit.
  for (double t : {0.1, 0.5, 0.9}) {
    const double bound = perfect_epr_bound(t);
    const auto snu = lossy_tmsv_snu(1e6, t);
    const double direct = oracle::golden_minimize(
        [&](double lambda) {
          return duan_inseparability_at_lambda<double>(snu, lambda);
        },
        1e-3, 1e3);
    CHECK(bound == doctest::Approx(direct).epsilon(1e-5));
    CHECK(bound == doctest::Approx((1.0 - t) / (1.0 + t)).epsilon(1e-6));
    CHECK(bound > 0.0);
    CHECK(bound < 1.0);
  }
  CHECK_THROWS_AS(perfect_epr_bound(0.0), invalid_parameter_error);
  CHECK_THROWS_AS(perfect_epr_bound(1.5), invalid_parameter_error);
}

TEST_CASE("bootstrap of a constant statistic has zero width") {
  const auto rec = sample_shots(make_tmsv(0.2), 1000, 4);
  const auto ci = bootstrap_ci(
      rec, [](const RecordMoments&) { return 42.0; }, 200, 9);
  CHECK(ci.point == 42.0);
  CHECK(ci.ci_lo == 42.0);
  CHECK(ci.ci_hi == 42.0);
  CHECK(ci.se == 0.0);
}

TEST_CASE("bootstrap interval width matches normal theory for a variance") {
  // Unit normals riding in the bob_x stream of a vacuum record.
  const uint64_t n = 100000;
  const auto rec = sample_shots(make_tmsv(0.0), n, 1212);
  auto var_bobx = [](const RecordMoments& m) {
    const double mean = m.sbx / m.w;
    return m.sbxx / m.w - mean * mean;
  };
  const auto ci = bootstrap_ci(rec, var_bobx, 500, 77);
  const double width = ci.ci_hi - ci.ci_lo;
  const double analytic_width = 4.0 * std::sqrt(2.0 / double(n - 1));
  CHECK(width == doctest::Approx(analytic_width).epsilon(0.20));
  CHECK(ci.se == doctest::Approx(std::sqrt(2.0 / double(n - 1))).epsilon(0.20));
  CHECK(ci.ci_lo < ci.point);
  CHECK(ci.point < ci.ci_hi);
}

TEST_CASE("bootstrap is deterministic under its seed") {
  const auto rec = sample_shots(make_tmsv(0.5), 20000, 5);
  auto stat = [](const RecordMoments& m) {
    return reid_epr<double>(reconstruct_cm_from_moments(m)).direct;
  };
  const auto a = bootstrap_ci(rec, stat, 300, 31);
  const auto b = bootstrap_ci(rec, stat, 300, 31);
  CHECK(a.ci_lo == b.ci_lo);
  CHECK(a.ci_hi == b.ci_hi);
  CHECK(a.se == b.se);
  const auto c = bootstrap_ci(rec, stat, 300, 32);
  CHECK(c.ci_lo != a.ci_lo);
}

TEST_CASE("degenerate resamples are redrawn and logged") {
  // A record with only two X shots: resamples that drop them (or keep just
  // one) cannot estimate the X-subsample variance and must be redrawn.
  MeasurementRecord rec;
  for (int i = 0; i < 64; ++i) {
    rec.alice_quad.push_back(i < 2 ? kQuadX : kQuadP);
    rec.alice.push_back(0.1 * (i % 9) - 0.4);
    rec.bob_x.push_back(0.2 * (i % 7) - 0.6);
    rec.bob_p.push_back(0.3 * (i % 5) - 0.6);
  }
  auto x_variance = [](const RecordMoments& m) {
    if (m.wx < 2) throw numeric_error("X subsample degenerate");
    const double mean = m.sax / m.wx;
    return m.saxx / m.wx - mean * mean;
  };
  const auto ci = bootstrap_ci(rec, x_variance, 200, 21);
  CHECK(ci.redraws > 0);
  CHECK(std::isfinite(ci.point + ci.se + ci.ci_lo + ci.ci_hi));
}

TEST_CASE("bootstrap rejects tiny resample counts") {
  const auto rec = sample_shots(make_tmsv(0.2), 500, 4);
  CHECK_THROWS_AS(
      bootstrap_ci(rec, [](const RecordMoments&) { return 0.0; }, 50, 1),
      invalid_parameter_error);
}

TEST_CASE("bootstrap intervals cover the analytic value") {
  // Repeated-trial coverage of the Reid criterion interval on fresh records.
  const double r = 0.452;
  const double truth = 1.0 / std::pow(std::cosh(2.0 * r), 2);
  const int trials = 100;
  int covered = 0;
  for (int t = 0; t < trials; ++t) {
    const auto rec = sample_shots(make_tmsv(r), 20000, 5000 + uint64_t(t));
    const auto ci = bootstrap_ci(
        rec,
        [](const RecordMoments& m) {
          return reid_epr<double>(reconstruct_cm_from_moments(m)).direct;
        },
        300, 6000 + uint64_t(t));
    covered += (truth >= ci.ci_lo && truth <= ci.ci_hi) ? 1 : 0;
  }
  CHECK(covered >= 93);
}

TEST_CASE("criteria converge to the state values as records grow") {
  const double r = 0.5;
  const double truth = 1.0 / std::pow(std::cosh(2.0 * r), 2);
  auto gap = [&](uint64_t n) {
    const auto rec = sample_shots(make_tmsv(r), n, 909);
    return std::abs(reid_epr<double>(reconstruct_cm(rec).cm).direct - truth);
  };
  CHECK(gap(100000) / gap(10000000) >= 3.0);
}

TEST_CASE("criteria report assembles consistent intervals") {
  const auto rec = sample_shots(make_tmsv(0.452), 100000, 33);
  BootstrapOptions options;
  options.n_boot = 300;
  options.seed = 77;
  const auto report = criteria_report(rec, options);

  const auto reid = reid_epr<double>(report.cm_est.cm);
  CHECK(report.e_direct.value == doctest::Approx(reid.direct).epsilon(1e-12));
  CHECK(report.duan_i.value ==
        doctest::Approx(duan_inseparability<double>(report.cm_est.cm))
            .epsilon(1e-12));
  CHECK(report.e_direct.lo <= report.e_direct.value);
  CHECK(report.e_direct.value <= report.e_direct.hi);
  CHECK(report.n_shots == 100000);

  // Intervals should bracket the analytic targets at this sample size.
  const double truth = 0.484;
  CHECK(report.e_direct.lo < truth + 0.02);
  CHECK(report.e_direct.hi > truth - 0.02);
  CHECK(report.state_purity.value == doctest::Approx(1.0).epsilon(0.05));
}
