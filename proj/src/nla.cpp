#include "mbnla/nla.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mbnla/diagnostics.hpp"
#include "mbnla/parallel.hpp"
#include "mbnla/quadrature.hpp"
#include "mbnla/rng.hpp"

namespace mbnla {

void validate(const FilterSpec& spec) {
  if (!(spec.gain >= 1.0) || !std::isfinite(spec.gain)) {
    std::ostringstream msg;
    msg << "filter gain must be >= 1, got " << spec.gain;
    throw invalid_parameter_error(msg.str());
  }
  if (!(spec.alpha_c >= 0.0) || !std::isfinite(spec.alpha_c)) {
    std::ostringstream msg;
    msg << "cutoff amplitude must be >= 0, got " << spec.alpha_c;
    throw invalid_parameter_error(msg.str());
  }
}

double filter_probability_from_norm(double alpha_norm_sq,
                                    const FilterSpec& spec) {
  if (spec.gain == 1.0) return 1.0;
  const double cutoff_sq = spec.alpha_c * spec.alpha_c;
  if (alpha_norm_sq >= cutoff_sq) return 1.0;
  const double c = 1.0 - 1.0 / (spec.gain * spec.gain);
  return std::exp(c * (alpha_norm_sq - cutoff_sq));
}

double filter_probability(std::complex<double> alpha, const FilterSpec& spec) {
  validate(spec);
  return filter_probability_from_norm(std::norm(alpha), spec);
}

namespace {

double cutoff_from_outcome_cov(const Eigen::Matrix2d& outcome_cov, double k_sd,
                               CutoffDiagnostics* diag) {
  if (!(k_sd == 0.0 || (k_sd >= 3.0 && k_sd <= 8.0))) {
    std::ostringstream msg;
    msg << "cutoff width must be 0 or in [3, 8] standard deviations, got "
        << k_sd;
    throw invalid_parameter_error(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(outcome_cov);
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(1);
  if (!(lo > 0)) {
    throw unphysical_state_error("outcome covariance not positive definite");
  }
  CutoffDiagnostics d;
  d.anisotropy = hi / lo;
  // Mean outcome variance per quadrature, halved into alpha components.
  d.sigma_alpha = std::sqrt(0.5 * (lo + hi) / 2.0);
  if (d.anisotropy > 2.0) {
    std::ostringstream msg;
    msg << "outcome covariance anisotropy " << d.anisotropy
        << " exceeds 2; the radially symmetric cutoff may fit poorly";
    warn(msg.str());
    d.warned = true;
  }
  if (diag) *diag = d;
  return k_sd * d.sigma_alpha;
}

}  // namespace

double choose_cutoff(const GaussianState<double>& state, double k_sd,
                     CutoffDiagnostics* diag) {
  validate_state(state);
  return cutoff_from_outcome_cov(heterodyne_outcome_covariance(state), k_sd,
                                 diag);
}

double choose_cutoff(const MeasurementRecord& record, double k_sd,
                     CutoffDiagnostics* diag) {
  const uint64_t n = record.size();
  if (n < 2) {
    throw invalid_parameter_error("cutoff estimation needs at least 2 shots");
  }
  double sx = 0, sp = 0, sxx = 0, spp = 0, sxp = 0;
  for (uint64_t i = 0; i < n; ++i) {
    const double x = record.bob_x[i];
    const double p = record.bob_p[i];
    sx += x;
    sp += p;
    sxx += x * x;
    spp += p * p;
    sxp += x * p;
  }
  const double mx = sx / double(n);
  const double mp = sp / double(n);
  Eigen::Matrix2d cov;
  cov(0, 0) = sxx / double(n) - mx * mx;
  cov(1, 1) = spp / double(n) - mp * mp;
  cov(0, 1) = cov(1, 0) = sxp / double(n) - mx * mp;
  return cutoff_from_outcome_cov(cov, k_sd, diag);
}

double choose_cutoff_for_sweep(const GaussianState<double>& state, double k_sd,
                               double g_max, CutoffDiagnostics* diag) {
  if (!(g_max >= 1.0)) {
    throw invalid_parameter_error("sweep cutoff needs a largest gain >= 1");
  }
  if (g_max == 1.0) return choose_cutoff(state, k_sd, diag);
  return choose_cutoff(analytic_nla(state, g_max), k_sd, diag);
}

FilterOutcome apply_mbnla(const MeasurementRecord& record,
                          const FilterSpec& spec, uint64_t seed) {
  validate(spec);
  if (record.filtered()) {
    std::ostringstream msg;
    msg << "record already carries gain " << record.meta.gain
        << "; the filter composes only with unfiltered records";
    throw invalid_parameter_error(msg.str());
  }
  const uint64_t n = record.size();
  if (n == 0) throw invalid_parameter_error("cannot filter an empty record");

  const double inv_gain = 1.0 / spec.gain;
  const uint64_t chunk =
      std::max<uint64_t>(1, (n + worker_count() - 1) / worker_count());
  const uint64_t n_shards = (n + chunk - 1) / chunk;

  struct Shard {
    std::vector<uint8_t> quad;
    std::vector<double> alice, bx, bp;
    double p_sum = 0;
  };
  std::vector<Shard> shards(n_shards);

  parallel_for_chunks(0, n_shards, [&](uint64_t shard_lo, uint64_t shard_hi) {
    for (uint64_t s = shard_lo; s < shard_hi; ++s) {
      Shard& out = shards[s];
      const uint64_t lo = s * chunk;
      const uint64_t hi = std::min(n, lo + chunk);
      for (uint64_t i = lo; i < hi; ++i) {
        const double bx = record.bob_x[i];
        const double bp = record.bob_p[i];
        const double p =
            filter_probability_from_norm(0.5 * (bx * bx + bp * bp), spec);
        out.p_sum += p;
        const auto words = rng_block(seed, Stream::Filter, i, 0);
        if (to_uniform(words[0], words[1]) < p) {
          out.quad.push_back(record.alice_quad[i]);
          out.alice.push_back(record.alice[i]);
          out.bx.push_back(bx * inv_gain);
          out.bp.push_back(bp * inv_gain);
        }
      }
    }
  });

  FilterOutcome outcome;
  outcome.n_in = n;
  double p_expected = 0;
  for (const auto& s : shards) {
    outcome.n_accept += s.quad.size();
    p_expected += s.p_sum;
  }
  p_expected /= double(n);
  if (outcome.n_accept == 0) {
    std::ostringstream msg;
    msg << "post-selection rejected all " << n
        << " shots (expected acceptance " << p_expected << ")";
    throw empty_ensemble_error(msg.str(), p_expected);
  }

  MeasurementRecord& out = outcome.record;
  out.meta = record.meta;
  out.meta.gain = spec.gain;
  out.alice_quad.reserve(outcome.n_accept);
  out.alice.reserve(outcome.n_accept);
  out.bob_x.reserve(outcome.n_accept);
  out.bob_p.reserve(outcome.n_accept);
  for (auto& s : shards) {
    out.alice_quad.insert(out.alice_quad.end(), s.quad.begin(), s.quad.end());
    out.alice.insert(out.alice.end(), s.alice.begin(), s.alice.end());
    out.bob_x.insert(out.bob_x.end(), s.bx.begin(), s.bx.end());
    out.bob_p.insert(out.bob_p.end(), s.bp.begin(), s.bp.end());
  }
  outcome.p_success = double(outcome.n_accept) / double(n);
  return outcome;
}

double gain_bound(const GaussianState<double>& state, double resolution) {
  validate_state(state);
  if (!(resolution > 0)) {
    throw invalid_parameter_error("gain-bound resolution must be positive");
  }
  constexpr double kCap = 1e6;
  if (detail::nla_gain_admissible(state, kCap)) {
    return std::numeric_limits<double>::infinity();
  }
  double lo = 1.0, hi = 2.0;
  if (!detail::nla_gain_admissible(state, lo)) {
    // Gain 1 is the identity map; only a numerically marginal state fails.
    return 1.0;
  }
  while (detail::nla_gain_admissible(state, hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    (detail::nla_gain_admissible(state, mid) ? lo : hi) = mid;
  }
  return lo;
}

double analytic_success_probability(const GaussianState<double>& state,
                                    const FilterSpec& spec, double rel_tol) {
  validate(spec);
  validate_state(state);
  if (spec.gain == 1.0 || spec.alpha_c == 0.0) return 1.0;
  if (!(rel_tol > 0)) {
    throw invalid_parameter_error("quadrature tolerance must be positive");
  }

  // Outcome density of alpha = (bob_x + i bob_p)/sqrt(2): Gaussian with
  // covariance (cm_B + I/2)/2 over (Re alpha, Im alpha).
  const Eigen::Matrix2d cov = 0.5 * heterodyne_outcome_covariance(state);
  const Eigen::Vector2d mu = state.mean.segment<2>(2) / std::numbers::sqrt2;
  const double det = cov.determinant();
  if (!(det > 0)) {
    throw unphysical_state_error("outcome covariance not positive definite");
  }
  const Eigen::Matrix2d prec = cov.inverse();
  const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
  auto density = [&](double x, double y) {
    const Eigen::Vector2d v(x - mu(0), y - mu(1));
    return norm * std::exp(-0.5 * v.dot(prec * v));
  };

  const double c = 1.0 - 1.0 / (spec.gain * spec.gain);
  const double cutoff_sq = spec.alpha_c * spec.alpha_c;
  const double inner_tol = rel_tol * 0.1;

  // Radial profile of a 2-D integrand: r times its angular average.
  auto ring = [&](auto point_fn) {
    return [&, point_fn](double r) {
      if (r == 0.0) return 0.0;
      const double angular = integrate_periodic(
          [&](double theta) {
            return point_fn(r * std::cos(theta), r * std::sin(theta));
          },
          inner_tol);
      return r * angular;
    };
  };

  // Relative control: size the absolute Simpson tolerance from a coarse pass.
  auto integrate_disc = [&](auto radial_fn) {
    double coarse = 0.0;
    constexpr int kPanels = 64;
    const double h = spec.alpha_c / kPanels;
    for (int i = 0; i < kPanels; ++i) {
      coarse += radial_fn(h * (i + 0.5)) * h;
    }
    const double abs_tol = std::max(std::abs(coarse), 1e-30) * rel_tol * 0.25;
    return integrate_adaptive(radial_fn, 0.0, spec.alpha_c, abs_tol);
  };

  // Weighted mass inside the truncation disc plus the untouched tail mass.
  const double weighted_disc = integrate_disc(ring([&](double x, double y) {
    return std::exp(c * (x * x + y * y - cutoff_sq)) * density(x, y);
  }));
  const double plain_disc = integrate_disc(
      ring([&](double x, double y) { return density(x, y); }));

  const double p = weighted_disc + (1.0 - std::min(plain_disc, 1.0));
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace mbnla
