#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smci/ais.hpp"
#include "smci/ising.hpp"
#include "smci/samplers.hpp"

namespace smci {

/// Estimated first and second moments. Pair moments and covariances are
/// indexed like model.edges(); covariance is always the plug-in value
/// pair_moment - m_i m_j.
struct MomentReport {
  std::vector<double> magnetization;
  std::vector<double> pair_moment;
  std::vector<double> covariance;
  std::string method;
  std::size_t n_samples = 0;
  std::optional<double> ess;
};

struct MaeResult {
  double mae = 0.0;
  std::vector<double> per_edge_abs_err;
};

struct EstimatorVariance {
  std::vector<double> magnetization;
  std::vector<double> pair_moment;
  std::vector<double> covariance;
};

/// Clamp applied to tanh(psi_ij) tanh(psi_ji) before atanh.
inline constexpr double kAtanhClamp = 1e-15;

/// Sample averages. Throws std::invalid_argument for an empty or mismatched set.
MomentReport mci_moments(const IsingModel& model, const SampleSet& samples);

/// (1/N) sum_mu tanh(phi_i^(mu)).
double smci1_magnetization(const IsingModel& model, double beta, const SampleSet& samples,
                           std::size_t i);

/// (1/N) sum_mu tanh[atanh(tanh psi_ij tanh psi_ji) + beta J_ij] with
/// psi_ij = phi_i - beta J_ij s_j. Throws std::invalid_argument when (i, j)
/// is not an edge.
double smci1_pair_moment(const IsingModel& model, double beta, const SampleSet& samples,
                         std::size_t i, std::size_t j);

/// First-order SMCI for every vertex and edge in O(N |E|).
MomentReport smci1_moments(const IsingModel& model, double beta, const SampleSet& samples);

enum class WeightedMode { mci, smci1 };

/// Importance-weighted estimators over AIS output. Weights are normalised
/// by log-sum-exp. mode = smci1 is the AIS-weighted first-order SMCI.
/// Throws std::runtime_error when every log weight is -inf.
MomentReport weighted_moments(const IsingModel& model, double beta, const WeightedSampleSet& ws,
                              WeightedMode mode);

/// Mean absolute covariance error over the edge set.
/// Throws std::invalid_argument when the edge counts differ.
MaeResult mae(const ExactSolution& exact, const MomentReport& approx);

/// Unbiased (divisor R - 1) per-quantity variance across R >= 2 reports.
EstimatorVariance empirical_estimator_variance(std::span<const MomentReport> runs);

}  // namespace smci
