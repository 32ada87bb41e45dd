#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smci/ising.hpp"
#include "smci/rng.hpp"

namespace smci {

/// Inverse-temperature ladder 0 = b_0 < b_1 < ... < b_K = 1.
class AnnealingSchedule {
 public:
  /// Throws std::invalid_argument unless the ladder is valid.
  explicit AnnealingSchedule(std::vector<double> betas);

  /// b_k = k / K.
  static AnnealingSchedule linear(std::size_t steps);

  std::size_t steps() const noexcept { return betas_.size() - 1; }
  double operator[](std::size_t k) const noexcept { return betas_[k]; }
  const std::vector<double>& betas() const noexcept { return betas_; }

  /// "linear:K" for linear ladders, "custom:K" otherwise.
  std::string descriptor() const;

 private:
  std::vector<double> betas_;
};

enum class Kernel { gibbs, blocked };

std::string_view to_string(Kernel k) noexcept;
Kernel kernel_from_string(std::string_view s);

struct SampleSetMeta {
  std::string sampler;   // "annealed", "ais", "parallel-tempering", "exact"
  std::string kernel;
  std::string schedule;  // schedule descriptor or PT ladder description
  std::uint64_t seed = 0;
  std::uint64_t model_hash = 0;
  std::size_t steps = 0;  // K, or sweeps between swaps for PT
};

/// N spin configurations stored row-major.
class SampleSet {
 public:
  SampleSet(std::size_t n, std::size_t count)
      : n_(n), count_(count), data_(n * count, Spin{1}) {}

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  std::span<Spin> operator[](std::size_t mu) noexcept { return {data_.data() + mu * n_, n_}; }
  std::span<const Spin> operator[](std::size_t mu) const noexcept {
    return {data_.data() + mu * n_, n_};
  }

  const std::vector<Spin>& data() const noexcept { return data_; }

  SampleSetMeta meta;

 private:
  std::size_t n_;
  std::size_t count_;
  std::vector<Spin> data_;
};

/// P(x_i = +1 | rest) = (1 + tanh phi) / 2, evaluated as the logistic
/// 1 / (1 + e^{-2 phi}) which is cheaper than tanh.
inline double up_probability(double phi) noexcept { return 1.0 / (1.0 + std::exp(-2.0 * phi)); }

/// One single-site Gibbs sweep over vertices 0..n-1 in order.
///
/// `draw(p)` returns true with probability p. The kernel is written against
/// this callable so the exact transition matrix can be reconstructed in
/// tests by enumerating outcomes.
template <typename Draw>
void gibbs_sweep_with(const IsingModel& model, double beta_eff, std::span<Spin> x, Draw&& draw) {
  const std::size_t n = model.n();
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = beta_eff * detail::field_sum(model, i, x.data());
    x[i] = draw(up_probability(phi)) ? Spin{1} : Spin{-1};
  }
}

/// Layer 0 drawn from P(x_V0 | x_V1), then layer 1 from P(x_V1 | new x_V0).
/// Sites within a layer are conditionally independent; each layer's fields
/// are computed before any of its sites change.
template <typename Draw>
void blocked_sweep_with(const IsingModel& model, double beta_eff, std::span<Spin> x, Draw&& draw) {
  if (!model.layers()) throw std::invalid_argument("blocked Gibbs needs a layered model");
  const std::size_t n0 = model.layers()->n0;
  const std::size_t n = model.n();
  // No edges inside a layer, so updating site i never changes the field of
  // another site in the same layer.
  for (std::size_t i = 0; i < n0; ++i) {
    const double phi = beta_eff * detail::field_sum(model, i, x.data());
    x[i] = draw(up_probability(phi)) ? Spin{1} : Spin{-1};
  }
  for (std::size_t j = n0; j < n; ++j) {
    const double phi = beta_eff * detail::field_sum(model, j, x.data());
    x[j] = draw(up_probability(phi)) ? Spin{1} : Spin{-1};
  }
}

void gibbs_sweep(const IsingModel& model, double beta_eff, std::span<Spin> x, Rng& rng);
void blocked_gibbs_sweep_bipartite(const IsingModel& model, double beta_eff, std::span<Spin> x,
                                   Rng& rng);

/// Dispatches to the sweep selected by `kernel`.
void sweep(Kernel kernel, const IsingModel& model, double beta_eff, std::span<Spin> x, Rng& rng);

/// Independent fair coin per spin.
void randomize(std::span<Spin> x, Rng& rng) noexcept;

/// N chains; chain mu uses Rng(split_seed(seed, mu)), starts uniform and
/// applies one sweep at beta_target * b_k for k = 1..K.
SampleSet annealed_sample_set(const IsingModel& model, double beta_target,
                              const AnnealingSchedule& schedule, Kernel kernel,
                              std::size_t count, std::uint64_t seed);

struct PtConfig {
  std::size_t num_replicas = 10;
  double beta_low_ratio = 0.01;  // coldest/hottest ratio of the ladder
  std::size_t sweeps_between_swaps = 100;
  std::size_t total_samples = 1000;
  Kernel kernel = Kernel::gibbs;

  friend bool operator==(const PtConfig&, const PtConfig&) = default;
};

/// Geometric ladder from beta_target down to beta_target * beta_low_ratio.
std::vector<double> pt_ladder(double beta_target, const PtConfig& pt);

/// min(1, exp((beta_a - beta_b)(E_a - E_b))) for swapping the states of
/// replicas at beta_a and beta_b.
double swap_acceptance(double beta_a, double beta_b, double energy_a, double energy_b) noexcept;

/// Proposes swaps between replica pairs (r, r+1) with r of the given parity.
/// `accept(p)` returns true with probability p. Returns the accepted count.
template <typename Accept>
std::size_t swap_pass_with(std::span<const double> betas, std::vector<SpinConfig>& states,
                           std::vector<double>& energies, std::size_t parity, Accept&& accept) {
  std::size_t accepted = 0;
  for (std::size_t r = parity; r + 1 < betas.size(); r += 2) {
    const double prob = swap_acceptance(betas[r], betas[r + 1], energies[r], energies[r + 1]);
    if (accept(prob)) {
      std::swap(states[r], states[r + 1]);
      std::swap(energies[r], energies[r + 1]);
      ++accepted;
    }
  }
  return accepted;
}

struct PtStats {
  std::size_t proposed_swaps = 0;
  std::size_t accepted_swaps = 0;
};

/// Replica exchange baseline. Each replica r owns Rng(split_seed(seed, r));
/// swap decisions use Rng(split_seed(seed, num_replicas)). One block of
/// sweeps_between_swaps sweeps is discarded as burn-in; after every later
/// block (sweeps then a swap pass, parity alternating from even) the
/// beta_target replica is recorded.
SampleSet parallel_tempering_sample_set(const IsingModel& model, double beta_target,
                                        const PtConfig& pt, std::uint64_t seed,
                                        PtStats* stats = nullptr);

}  // namespace smci
