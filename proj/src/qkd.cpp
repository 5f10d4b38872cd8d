#include "mbnla/qkd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mbnla/diagnostics.hpp"
#include "mbnla/nla.hpp"
#include "mbnla/symplectic.hpp"

namespace mbnla {

EffectiveChannel effective_channel(const Eigen::Matrix4d& cm_snu) {
  EffectiveChannel ch;
  const double v = 0.5 * (cm_snu(0, 0) + cm_snu(1, 1));
  const double b = 0.5 * (cm_snu(2, 2) + cm_snu(3, 3));
  const double c = 0.5 * (cm_snu(0, 2) - cm_snu(1, 3));
  ch.source_v = std::max(v, 1.0);

  if (ch.source_v - 1.0 < 1e-12 || std::abs(c) < 1e-12) {
    // No correlations: (V = 1, T arbitrary) is a degenerate family.
    ch.source_v = 1.0;
    ch.t_eff = 1.0;
    ch.xi = std::max(b - 1.0, 0.0);
    ch.degenerate = true;
  } else {
    ch.t_eff = c * c / (ch.source_v * ch.source_v - 1.0);
    if (ch.t_eff > 1.0) ch.t_eff = 1.0;
    ch.xi = std::max(b - (ch.t_eff * ch.source_v + 1.0 - ch.t_eff), 0.0);
  }

  // Residual of the fitted model against the standard-form entries.
  Eigen::Matrix4d model = Eigen::Matrix4d::Zero();
  model(0, 0) = model(1, 1) = ch.source_v;
  model(2, 2) = model(3, 3) =
      ch.t_eff * ch.source_v + 1.0 - ch.t_eff + ch.xi;
  const double cross =
      std::sqrt(std::max(ch.t_eff, 0.0)) *
      std::sqrt(std::max(ch.source_v * ch.source_v - 1.0, 0.0));
  model(0, 2) = model(2, 0) = cross;
  model(1, 3) = model(3, 1) = -cross;
  ch.residual = (model - cm_snu).cwiseAbs().maxCoeff();
  if (ch.residual > 1e-3) {
    ch.model_mismatch = true;
    std::ostringstream msg;
    msg << "pure-source channel model misses the estimate by " << ch.residual
        << " SNU; proceeding pessimistically";
    note(msg.str());
  }
  return ch;
}

namespace {

double clamp_bits(double bits, bool& clamped) {
  if (bits < 0) {
    clamped = true;
    diag_counters().holevo_clamps++;
    return 0.0;
  }
  return bits;
}

struct HolevoDetail {
  double s_ae = 0;
  std::array<double, 2> nu{0.5, 0.5};
  bool clamped = false;
};

HolevoDetail holevo_detail(const Eigen::Matrix4d& cm_snu) {
  const Eigen::Matrix4d cm_nat = cm_to_natural(cm_snu);
  const auto projection = project_to_physical<double>(cm_nat);

  GaussianState<double> state;
  state.cm = projection.cm;
  state.label = "holevo";

  HolevoDetail d;
  d.nu = projection.nu;
  bool clamped = false;
  const double s_ab = clamp_bits(gaussian_entropy_g(projection.nu[0] - 0.5) +
                                     gaussian_entropy_g(projection.nu[1] - 0.5),
                                 clamped);
  const Eigen::Matrix2d cond = conditional_cm_after_heterodyne(state, Mode::A);
  const auto cond_proj = [&] {
    // The conditional block inherits estimate noise; clip its symplectic
    // eigenvalue the same way as the full matrix.
    Eigen::Matrix2d c = cond;
    const double det = c.determinant();
    if (det > 0 && std::sqrt(det) >= 0.5) return c;
    if (!(c(0, 0) > 0) || !(c(1, 1) > 0)) {
      throw unphysical_state_error(
          "conditional covariance unphysical after projection tolerance");
    }
    const double scale = det > 0 ? 0.5 / std::sqrt(det) : 0.0;
    if (scale > 0) {
      c *= scale;
    } else {
      c = 0.5 * Eigen::Matrix2d::Identity();
    }
    diag_counters().physicality_projections++;
    return c;
  }();
  const double s_b_given_a =
      clamp_bits(von_neumann_entropy(cond_proj), clamped);
  double s_ae = s_ab - s_b_given_a;
  if (s_ae < 1e-9) {
    // Pure (to precision) source: Eve holds nothing.
    d.clamped = true;
    if (s_ae < 0) diag_counters().holevo_clamps++;
    s_ae = std::max(s_ae, 0.0);
  }
  d.clamped = d.clamped || clamped;
  d.s_ae = s_ae;
  return d;
}

}  // namespace

double holevo_bound(const Eigen::Matrix4d& cm_snu) {
  return holevo_detail(cm_snu).s_ae;
}

double mutual_information(const Eigen::Matrix4d& cm_snu) {
  auto per_quadrature = [](double va, double vb, double c) {
    if (!(vb + 1.0 > 0)) {
      throw numeric_error("degenerate conditioning variance in I(A:B)");
    }
    const double va_cond = va - c * c / (vb + 1.0);
    return 0.5 * std::log2((va + 1.0) / (va_cond + 1.0));
  };
  const double ix = per_quadrature(cm_snu(0, 0), cm_snu(2, 2), cm_snu(0, 2));
  const double ip = per_quadrature(cm_snu(1, 1), cm_snu(3, 3), cm_snu(1, 3));
  return std::max(ix + ip, 0.0);
}

KeyRateReport key_rate(const Eigen::Matrix4d& cm_snu, double beta_rec,
                       double gain) {
  if (!(beta_rec >= 0.0) || !(beta_rec <= 1.0)) {
    std::ostringstream msg;
    msg << "reconciliation efficiency must lie in [0, 1], got " << beta_rec;
    throw invalid_parameter_error(msg.str());
  }
  const EffectiveChannel ch = effective_channel(cm_snu);
  const HolevoDetail holevo = holevo_detail(cm_snu);

  KeyRateReport report;
  report.i_ab = mutual_information(cm_snu);
  report.s_ae = holevo.s_ae;
  report.k = beta_rec * report.i_ab - report.s_ae;
  report.beta_rec = beta_rec;
  report.nu = holevo.nu;
  report.t_eff = ch.t_eff;
  report.xi = ch.xi;
  report.gain = gain;
  report.pure_source_clamp = holevo.clamped;
  return report;
}

std::vector<KeyRateEntry> keyrate_sweep(const GaussianState<double>& state,
                                        const std::vector<double>& gains,
                                        double beta_rec) {
  std::vector<KeyRateEntry> rows;
  rows.reserve(gains.size());
  for (double g : gains) {
    KeyRateEntry row;
    row.gain = g;
    try {
      const GaussianState<double> amplified = analytic_nla(state, g);
      row.report = key_rate(cm_to_snu(amplified.cm), beta_rec, g);
      row.k_lo = row.k_hi = row.report.k;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<KeyRateEntry> keyrate_sweep(const MeasurementRecord& record,
                                        const std::vector<double>& gains,
                                        double beta_rec,
                                        const MonteCarloSweepOptions& options) {
  if (record.filtered()) {
    throw invalid_parameter_error(
        "Monte Carlo key-rate sweep needs an unfiltered record");
  }
  // Size the shared cutoff to the largest gain the reconstructed state
  // admits; gains beyond the bound fail per-row below.
  const double alpha_c = [&] {
    GaussianState<double> est;
    est.cm = cm_to_natural(reconstruct_cm(record).cm);
    est.label = "reconstructed";
    for (auto it = gains.rbegin(); it != gains.rend(); ++it) {
      try {
        return choose_cutoff_for_sweep(est, options.k_sd, *it);
      } catch (const gain_exceeds_bound_error&) {
        continue;
      }
    }
    return choose_cutoff(record, options.k_sd);
  }();
  std::vector<KeyRateEntry> rows;
  rows.reserve(gains.size());
  for (double g : gains) {
    KeyRateEntry row;
    row.gain = g;
    try {
      const FilterOutcome filtered =
          apply_mbnla(record, FilterSpec{g, alpha_c}, options.filter_seed);
      row.p_success = filtered.p_success;

      BootstrapOptions boot;
      boot.n_boot = options.n_boot;
      boot.seed = options.boot_seed;
      const ScalarBootstrap k_boot = [&] {
        BootstrapOptions b = boot;
        const BootstrapSummary s = bootstrap_moments(
            filtered.record,
            [&](const RecordMoments& m) {
              Eigen::VectorXd v(1);
              v(0) = key_rate(reconstruct_cm_from_moments(m), beta_rec, g).k;
              return v;
            },
            b);
        return ScalarBootstrap{s.point(0), s.se(0), s.ci_lo(0), s.ci_hi(0),
                               s.redraws};
      }();

      row.report =
          key_rate(reconstruct_cm(filtered.record).cm, beta_rec, g);
      row.k_se = k_boot.se;
      // 1-sigma interval around the point estimate.
      row.k_lo = row.report.k - k_boot.se;
      row.k_hi = row.report.k + k_boot.se;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mbnla
