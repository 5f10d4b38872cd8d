#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mbnla/gaussian.hpp"

namespace mbnla {

// Correlated measurement records: Alice homodynes one quadrature per shot,
// alternating X, P, X, P, ...; Bob heterodynes both quadratures of his arm.
// Outcomes are stored in natural quadrature units, so Bob's outcome
// covariance is cm_B + 1/2 I (one vacuum unit of heterodyne penalty) and his
// cross-covariance to Alice equals the state's cross block.

inline constexpr uint8_t kQuadX = 0;
inline constexpr uint8_t kQuadP = 1;

/// Provenance carried with every record.
struct RecordMeta {
  std::string state_label;
  uint64_t state_digest = 0;
  uint64_t seed = 0;
  uint64_t n_requested = 0;
  uint32_t convention = 1;  // 1 = natural-quadrature-v1
  double gain = 1.0;        // 1.0 means unfiltered
};

/// Shot-major storage of a measurement run. After generation alice_quad[i]
/// == i % 2; filtering keeps the original labels of surviving shots.
struct MeasurementRecord {
  std::vector<uint8_t> alice_quad;
  std::vector<double> alice;
  std::vector<double> bob_x;
  std::vector<double> bob_p;
  RecordMeta meta;

  uint64_t size() const { return alice.size(); }
  bool filtered() const { return meta.gain != 1.0; }
};

bool records_equal(const MeasurementRecord& a, const MeasurementRecord& b);

/// FNV-1a digest of the state's covariance matrix, mean and label; stored in
/// record headers for provenance checks.
uint64_t state_digest(const GaussianState<double>& state);

/// Default in-memory budget for sample_shots (bytes). Larger requests must go
/// through the streaming writer in record_io.
inline constexpr uint64_t kDefaultRecordBudget = uint64_t(4) << 30;

/// Draws n correlated shots from the state. Bob's pair is jointly Gaussian
/// with covariance cm_B + 1/2 I; Alice's value is drawn from her exact
/// conditional given Bob's outcome pair. Identical (state, n, seed) inputs
/// reproduce the record bit-exactly, shard-parallel or serial.
MeasurementRecord sample_shots(const GaussianState<double>& state, uint64_t n,
                               uint64_t seed,
                               uint64_t memory_budget = kDefaultRecordBudget);

/// Streaming variant: fills caller-managed chunks of at most chunk_size shots
/// in order. Used by the record writer for out-of-memory ensembles.
void sample_shots_chunked(
    const GaussianState<double>& state, uint64_t n, uint64_t seed,
    uint64_t chunk_size,
    const std::function<void(const MeasurementRecord& chunk)>& sink);

/// Bob's heterodyne outcome covariance cm_B + 1/2 I (natural units); also
/// what the filter cutoff is sized against.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> heterodyne_outcome_covariance(
    const GaussianState<Scalar>& state) {
  return state.block(Mode::B) +
         Scalar(0.5) * Eigen::Matrix<Scalar, 2, 2>::Identity();
}

/// Covariance of the kept mode after a heterodyne measurement of the other:
/// cm_kept - C (cm_meas + 1/2 I)^{-1} C^T.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> conditional_cm_after_heterodyne(
    const GaussianState<Scalar>& state, Mode measured) {
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
  const Mode kept = measured == Mode::A ? Mode::B : Mode::A;
  const Matrix2 meas =
      state.block(measured) + Scalar(0.5) * Matrix2::Identity();
  // Cross block with rows on the kept mode.
  Matrix2 cross;
  if (measured == Mode::A) {
    cross = state.cross().transpose();
  } else {
    cross = state.cross();
  }
  const Scalar det = meas.determinant();
  if (!(std::abs(det) > Scalar(1e-300))) {
    throw numeric_error("singular conditioning block in heterodyne Schur map");
  }
  return state.block(kept) - cross * meas.inverse() * cross.transpose();
}

}  // namespace mbnla
