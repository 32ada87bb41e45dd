#include "smci/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smci {

AnnealingSchedule::AnnealingSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.size() < 2) throw std::invalid_argument("annealing schedule needs K >= 1");
  if (betas_.front() != 0.0 || betas_.back() != 1.0)
    throw std::invalid_argument("annealing schedule must start at 0 and end at 1");
  for (std::size_t k = 1; k < betas_.size(); ++k) {
    if (!(betas_[k] > betas_[k - 1])) throw std::invalid_argument("annealing schedule must be strictly increasing");
  }
}

AnnealingSchedule AnnealingSchedule::linear(std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("annealing schedule needs K >= 1");
  std::vector<double> b(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) b[k] = static_cast<double>(k) / static_cast<double>(steps);
  return AnnealingSchedule(std::move(b));
}

std::string AnnealingSchedule::descriptor() const {
  const std::size_t k = steps();
  bool is_linear = true;
  for (std::size_t i = 0; i <= k; ++i) {
    if (betas_[i] != static_cast<double>(i) / static_cast<double>(k)) {
      is_linear = false;
      break;
    }
  }
  return (is_linear ? "linear:" : "custom:") + std::to_string(k);
}

std::string_view to_string(Kernel k) noexcept {
  return k == Kernel::gibbs ? "gibbs" : "blocked";
}

Kernel kernel_from_string(std::string_view s) {
  if (s == "gibbs") return Kernel::gibbs;
  if (s == "blocked") return Kernel::blocked;
  throw std::invalid_argument("unknown kernel '" + std::string(s) + "'");
}

void gibbs_sweep(const IsingModel& model, double beta_eff, std::span<Spin> x, Rng& rng) {
  gibbs_sweep_with(model, beta_eff, x, [&rng](double p) { return rng.uniform() < p; });
}

void blocked_gibbs_sweep_bipartite(const IsingModel& model, double beta_eff, std::span<Spin> x,
                                   Rng& rng) {
  blocked_sweep_with(model, beta_eff, x, [&rng](double p) { return rng.uniform() < p; });
}

void sweep(Kernel kernel, const IsingModel& model, double beta_eff, std::span<Spin> x, Rng& rng) {
  if (kernel == Kernel::blocked)
    blocked_gibbs_sweep_bipartite(model, beta_eff, x, rng);
  else
    gibbs_sweep(model, beta_eff, x, rng);
}

void randomize(std::span<Spin> x, Rng& rng) noexcept {
  for (auto& s : x) s = rng.coin() ? Spin{1} : Spin{-1};
}

SampleSet annealed_sample_set(const IsingModel& model, double beta_target,
                              const AnnealingSchedule& schedule, Kernel kernel,
                              std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample count must be >= 1");
  if (kernel == Kernel::blocked && !model.layers())
    throw std::invalid_argument("blocked Gibbs needs a layered model");
  SampleSet set(model.n(), count);
  const std::size_t steps = schedule.steps();
  for (std::size_t mu = 0; mu < count; ++mu) {
    Rng rng(split_seed(seed, mu));
    auto x = set[mu];
    randomize(x, rng);
    for (std::size_t k = 1; k <= steps; ++k) sweep(kernel, model, beta_target * schedule[k], x, rng);
  }
  set.meta = {"annealed", std::string(to_string(kernel)), schedule.descriptor(), seed, model.hash(),
              steps};
  return set;
}

std::vector<double> pt_ladder(double beta_target, const PtConfig& pt) {
  if (pt.num_replicas == 0) throw std::invalid_argument("PT needs at least one replica");
  if (!(pt.beta_low_ratio > 0.0 && pt.beta_low_ratio < 1.0))
    throw std::invalid_argument("PT ladder ratio must lie in (0, 1)");
  std::vector<double> betas(pt.num_replicas, beta_target);
  if (pt.num_replicas == 1) return betas;
  const double denom = static_cast<double>(pt.num_replicas - 1);
  for (std::size_t r = 0; r < pt.num_replicas; ++r)
    betas[r] = beta_target * std::pow(pt.beta_low_ratio, static_cast<double>(r) / denom);
  return betas;
}

double swap_acceptance(double beta_a, double beta_b, double energy_a, double energy_b) noexcept {
  const double exponent = (beta_a - beta_b) * (energy_a - energy_b);
  return exponent >= 0.0 ? 1.0 : std::exp(exponent);
}

SampleSet parallel_tempering_sample_set(const IsingModel& model, double beta_target,
                                        const PtConfig& pt, std::uint64_t seed, PtStats* stats) {
  if (pt.sweeps_between_swaps == 0 || pt.total_samples == 0)
    throw std::invalid_argument("PT counts must be >= 1");
  if (pt.kernel == Kernel::blocked && !model.layers())
    throw std::invalid_argument("blocked Gibbs needs a layered model");
  const auto betas = pt_ladder(beta_target, pt);
  const std::size_t replicas = betas.size();

  std::vector<Rng> rngs;
  rngs.reserve(replicas);
  for (std::size_t r = 0; r < replicas; ++r) rngs.emplace_back(split_seed(seed, r));
  Rng swap_rng(split_seed(seed, replicas));

  std::vector<SpinConfig> states(replicas, SpinConfig(model.n()));
  for (std::size_t r = 0; r < replicas; ++r) randomize(states[r], rngs[r]);
  std::vector<double> energies(replicas);

  SampleSet set(model.n(), pt.total_samples);
  PtStats local;
  auto accept = [&swap_rng](double p) { return p >= 1.0 || swap_rng.uniform() < p; };

  // Block 0 is burn-in; blocks 1..N are recorded.
  for (std::size_t block = 0; block <= pt.total_samples; ++block) {
    for (std::size_t r = 0; r < replicas; ++r) {
      for (std::size_t s = 0; s < pt.sweeps_between_swaps; ++s)
        sweep(pt.kernel, model, betas[r], states[r], rngs[r]);
      energies[r] = energy(model, states[r]);
    }
    const std::size_t parity = block % 2;
    if (replicas > 1) {
      local.proposed_swaps += (replicas - parity) / 2;
      local.accepted_swaps += swap_pass_with(betas, states, energies, parity, accept);
    }
    if (block > 0) std::copy(states[0].begin(), states[0].end(), set[block - 1].begin());
  }
  if (stats) *stats = local;

  std::ostringstream ladder;
  ladder << "geometric:" << replicas << ":" << pt.beta_low_ratio << ":burnin=1:alternating";
  set.meta = {"parallel-tempering", std::string(to_string(pt.kernel)), ladder.str(), seed,
              model.hash(), pt.sweeps_between_swaps};
  return set;
}

}  // namespace smci
