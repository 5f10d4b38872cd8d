#include "mbnla/measurement.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "mbnla/parallel.hpp"
#include "mbnla/rng.hpp"

namespace mbnla {

namespace {

uint64_t fnv1a(const void* data, size_t len, uint64_t h) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

constexpr uint64_t kFnvOffset = 14695981039346656037ull;

// Per-state sampling coefficients. Bob's outcome pair is L z + mean_B with
// L the Cholesky factor of cm_B + I/2; Alice's value regresses on the pair
// with quadrature-specific weights plus independent conditional noise.
struct ShotSampler {
  Eigen::Matrix2d chol;
  Eigen::Vector2d mean_bob;
  Eigen::Vector2d weight[2];
  double cond_sd[2];
  double mean_alice[2];

  explicit ShotSampler(const GaussianState<double>& state) {
    const Eigen::Matrix2d outcome_cov = heterodyne_outcome_covariance(state);
    Eigen::LLT<Eigen::Matrix2d> llt(outcome_cov);
    if (llt.info() != Eigen::Success) {
      throw numeric_error("Bob outcome covariance not positive definite");
    }
    chol = llt.matrixL();
    mean_bob = state.mean.segment<2>(2);
    for (int q = 0; q < 2; ++q) {
      const Eigen::Vector2d cross(state.cm(q, 2), state.cm(q, 3));
      weight[q] = llt.solve(cross);
      const double cond_var = state.cm(q, q) - cross.dot(weight[q]);
      if (cond_var < -1e-12) {
        throw unphysical_state_error(
            "negative conditional homodyne variance while sampling");
      }
      cond_sd[q] = std::sqrt(std::max(cond_var, 0.0));
      mean_alice[q] = state.mean(q);
    }
  }

  void sample(uint64_t shot, uint64_t seed, uint8_t& quad, double& alice,
              double& bx, double& bp) const {
    const auto n01 =
        to_normal_pair(rng_block(seed, Stream::Measurement, shot, 0));
    const auto n23 =
        to_normal_pair(rng_block(seed, Stream::Measurement, shot, 1));
    const Eigen::Vector2d bob =
        mean_bob + chol * Eigen::Vector2d(n01[0], n01[1]);
    const int q = int(shot & 1);
    quad = uint8_t(q);
    alice = mean_alice[q] + weight[q].dot(bob - mean_bob) + cond_sd[q] * n23[0];
    bx = bob(0);
    bp = bob(1);
  }
};

}  // namespace

uint64_t state_digest(const GaussianState<double>& state) {
  uint64_t h = kFnvOffset;
  h = fnv1a(state.cm.data(), sizeof(double) * 16, h);
  h = fnv1a(state.mean.data(), sizeof(double) * 4, h);
  h = fnv1a(state.label.data(), state.label.size(), h);
  return h;
}

bool records_equal(const MeasurementRecord& a, const MeasurementRecord& b) {
  auto bits_equal = [](const std::vector<double>& x,
                       const std::vector<double>& y) {
    return x.size() == y.size() &&
           (x.empty() ||
            std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
  };
  return a.alice_quad == b.alice_quad && bits_equal(a.alice, b.alice) &&
         bits_equal(a.bob_x, b.bob_x) && bits_equal(a.bob_p, b.bob_p);
}

MeasurementRecord sample_shots(const GaussianState<double>& state, uint64_t n,
                               uint64_t seed, uint64_t memory_budget) {
  if (n < 1) throw invalid_parameter_error("shot count must be >= 1");
  constexpr uint64_t kBytesPerShot = 3 * sizeof(double) + 1;
  if (n > memory_budget / kBytesPerShot) {
    std::ostringstream msg;
    msg << n << " shots exceed the in-memory budget of " << memory_budget
        << " bytes; use the streaming record writer";
    throw invalid_parameter_error(msg.str());
  }
  validate_state(state);
  const ShotSampler sampler(state);

  MeasurementRecord rec;
  rec.alice_quad.resize(n);
  rec.alice.resize(n);
  rec.bob_x.resize(n);
  rec.bob_p.resize(n);
  rec.meta.state_label = state.label;
  rec.meta.state_digest = state_digest(state);
  rec.meta.seed = seed;
  rec.meta.n_requested = n;

  parallel_for_chunks(0, n, [&](uint64_t lo, uint64_t hi) {
    for (uint64_t i = lo; i < hi; ++i) {
      sampler.sample(i, seed, rec.alice_quad[i], rec.alice[i], rec.bob_x[i],
                     rec.bob_p[i]);
    }
  });
  return rec;
}

void sample_shots_chunked(
    const GaussianState<double>& state, uint64_t n, uint64_t seed,
    uint64_t chunk_size,
    const std::function<void(const MeasurementRecord& chunk)>& sink) {
  if (n < 1) throw invalid_parameter_error("shot count must be >= 1");
  if (chunk_size < 1) throw invalid_parameter_error("chunk size must be >= 1");
  validate_state(state);
  const ShotSampler sampler(state);

  MeasurementRecord chunk;
  chunk.meta.state_label = state.label;
  chunk.meta.state_digest = state_digest(state);
  chunk.meta.seed = seed;
  chunk.meta.n_requested = n;

  for (uint64_t start = 0; start < n; start += chunk_size) {
    const uint64_t count = std::min(chunk_size, n - start);
    chunk.alice_quad.resize(count);
    chunk.alice.resize(count);
    chunk.bob_x.resize(count);
    chunk.bob_p.resize(count);
    parallel_for_chunks(0, count, [&](uint64_t lo, uint64_t hi) {
      for (uint64_t i = lo; i < hi; ++i) {
        sampler.sample(start + i, seed, chunk.alice_quad[i], chunk.alice[i],
                       chunk.bob_x[i], chunk.bob_p[i]);
      }
    });
    sink(chunk);
  }
}

}  // namespace mbnla
