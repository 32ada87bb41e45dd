#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "smci/ising.hpp"
#include "smci/samplers.hpp"

namespace smci {

/// Endpoints x^(K) of N annealing trajectories and their log importance weights.
struct WeightedSampleSet {
  SampleSet samples;
  std::vector<double> log_weights;
};

struct AisDiagnostics {
  double log_omega = 0.0;        // ln sum_mu w_mu
  double ess = 0.0;              // (sum w)^2 / sum w^2
  double max_weight_share = 0.0;  // max_mu w_mu / sum w
};

/// Wall-clock split of an AIS run into trajectory sampling and weight
/// (energy) evaluation.
struct AisPhaseTimes {
  std::chrono::nanoseconds sampling{0};
  std::chrono::nanoseconds weights{0};
};

/// ln sum_i exp(v_i), shifted by the maximum. Sequential fold in index order.
/// Returns -inf for an empty span or when every entry is -inf.
double log_sum_exp(std::span<const double> values) noexcept;

/// One AIS trajectory: x^(1) uniform; x^(k) = T_{k-1}(x^(k-1)) for k = 2..K,
/// with T_{k-1} a sweep at beta_target * b_{k-1}; and
/// ln w = -beta_target * sum_{k=1..K} (b_k - b_{k-1}) E(x^(k)).
/// Writes x^(K) into `x`. When `trajectory` is non-null it receives
/// x^(1)..x^(K).
double ais_chain(const IsingModel& model, double beta_target, const AnnealingSchedule& schedule,
                 Kernel kernel, std::span<Spin> x, Rng& rng,
                 std::vector<SpinConfig>* trajectory = nullptr, AisPhaseTimes* times = nullptr);

/// N independent chains; chain mu uses Rng(split_seed(seed, mu)).
WeightedSampleSet run_ais(const IsingModel& model, double beta_target,
                          const AnnealingSchedule& schedule, Kernel kernel, std::size_t count,
                          std::uint64_t seed, AisPhaseTimes* times = nullptr);

/// Log of an unnormalised intermediate density ln P_k^dagger(x).
using LogDensity = std::function<double(std::size_t k, std::span<const Spin> x)>;

/// Generic weight ln w = sum_{k=1..K} [ln P_k^dagger(x^(k)) - ln P_{k-1}^dagger(x^(k))]
/// over a recorded trajectory x^(1)..x^(K).
double ais_log_weight_ratio(std::span<const SpinConfig> trajectory, const LogDensity& log_density);

/// ln P_k^dagger(x) = (1 - b_k) ln P_0^dagger(x) - b_k beta E(x) for the
/// geometric path between P_0 and the target.
LogDensity geometric_path(const IsingModel& model, double beta_target,
                          const AnnealingSchedule& schedule,
                          std::function<double(std::span<const Spin>)> log_initial);

/// Throws std::invalid_argument for an empty set.
AisDiagnostics ais_normalizer(const WeightedSampleSet& ws);

/// F = -(1/beta) n ln 2 - (1/beta)(ln Omega - ln N).
/// Throws std::domain_error when beta_target <= 0.
double free_energy_estimate(const WeightedSampleSet& ws, double beta_target, std::size_t n);

}  // namespace smci
