#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "mbnla/criteria.hpp"
#include "mbnla/gaussian.hpp"
#include "mbnla/measurement.hpp"

namespace mbnla {

// Secret key rates for the direct-reconciliation protocol with heterodyne
// detection on both sides, under the pessimistic reading in which every
// measured imperfection is granted to the eavesdropper: the source is treated
// as a pure EPR state sent through a lossy thermal channel. Covariance
// matrices enter in SNU.

/// Pure-source channel parameters fitted to a measured covariance matrix.
struct EffectiveChannel {
  double source_v = 1;  // EPR source variance, SNU
  double t_eff = 1;     // channel transmissivity
  double xi = 0;        // excess noise at the channel output, SNU
  double residual = 0;  // worst standard-form mismatch of the fitted model
  bool degenerate = false;
  bool model_mismatch = false;
};

/// Fits (V, T, xi) so a pure EPR source through a lossy thermal channel
/// reproduces the standard-form invariants of cm_est. Uncorrelated inputs are
/// flagged degenerate; a residual above 1e-3 SNU attaches a model-mismatch
/// warning but the computation proceeds (pessimistically).
EffectiveChannel effective_channel(const Eigen::Matrix4d& cm_snu);

/// Classical mutual information (bits per channel use) between both parties'
/// dual-quadrature heterodyne outcomes: per quadrature
/// (1/2) log2[(V_A + 1)/(V_{A|B} + 1)], summed over x and p, with the
/// conditioning variance carrying Bob's heterodyne unit.
double mutual_information(const Eigen::Matrix4d& cm_snu);

/// Holevo bound S(A:E) = S(AB) - S(B|A) in bits, entropies from the
/// symplectic spectra of the full and the Alice-heterodyne-conditioned
/// covariance matrices. The estimate is projected to the physical set first;
/// round-off negatives are clamped to zero and counted.
double holevo_bound(const Eigen::Matrix4d& cm_snu);

struct KeyRateReport {
  double i_ab = 0;      // bits per channel use
  double s_ae = 0;      // bits per channel use
  double k = 0;         // beta * i_ab - s_ae, may be negative
  double beta_rec = 1;  // reconciliation efficiency
  std::array<double, 2> nu{0.5, 0.5};  // symplectic eigenvalues used (natural)
  double t_eff = 1;
  double xi = 0;
  double gain = 1;  // amplifier gain this row corresponds to
  bool pure_source_clamp = false;
};

/// Asymptotic key rate K = beta I(A:B) - S(A:E) for the given covariance
/// estimate. Negative rates are reported as-is.
KeyRateReport key_rate(const Eigen::Matrix4d& cm_snu, double beta_rec,
                       double gain = 1.0);

enum class SweepMode { Analytic, MonteCarlo };

struct KeyRateEntry {
  double gain = 1;
  KeyRateReport report;
  double k_se = 0;                 // 1-sigma spread (Monte Carlo mode)
  double k_lo = 0, k_hi = 0;       // 1-sigma interval (Monte Carlo mode)
  double p_success = 1;            // acceptance rate (Monte Carlo mode)
  std::string error;               // per-point failure, sweep continues
};

/// Ideal-amplifier sweep over gains on a known state.
std::vector<KeyRateEntry> keyrate_sweep(const GaussianState<double>& state,
                                        const std::vector<double>& gains,
                                        double beta_rec);

struct MonteCarloSweepOptions {
  double k_sd = 4.5;       // cutoff width; one cutoff serves the whole sweep
  uint64_t filter_seed = 0;
  int n_boot = 500;
  uint64_t boot_seed = 0;
};

/// Post-selection sweep on a measured record: filter at each gain,
/// reconstruct, and evaluate the key rate with bootstrap error bars.
std::vector<KeyRateEntry> keyrate_sweep(const MeasurementRecord& record,
                                        const std::vector<double>& gains,
                                        double beta_rec,
                                        const MonteCarloSweepOptions& options);

}  // namespace mbnla
