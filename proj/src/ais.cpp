#include "smci/ais.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace smci {

namespace {
using Clock = std::chrono::steady_clock;
}

double log_sum_exp(std::span<const double> values) noexcept {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double peak = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

double ais_chain(const IsingModel& model, double beta_target, const AnnealingSchedule& schedule,
                 Kernel kernel, std::span<Spin> x, Rng& rng, std::vector<SpinConfig>* trajectory,
                 AisPhaseTimes* times) {
  const std::size_t steps = schedule.steps();
  if (trajectory) trajectory->clear();

  auto t0 = times ? Clock::now() : Clock::time_point{};
  randomize(x, rng);
  double exponent = 0.0;  // sum_k (b_k - b_{k-1}) E(x^(k))
  for (std::size_t k = 1; k <= steps; ++k) {
    if (k >= 2) sweep(kernel, model, beta_target * schedule[k - 1], x, rng);
    if (trajectory) trajectory->emplace_back(x.begin(), x.end());
    if (times) {
      const auto t1 = Clock::now();
      times->sampling += t1 - t0;
      exponent += (schedule[k] - schedule[k - 1]) * energy(model, x);
      t0 = Clock::now();
      times->weights += t0 - t1;
    } else {
      exponent += (schedule[k] - schedule[k - 1]) * energy(model, x);
    }
  }
  return -beta_target * exponent;
}

WeightedSampleSet run_ais(const IsingModel& model, double beta_target,
                          const AnnealingSchedule& schedule, Kernel kernel, std::size_t count,
                          std::uint64_t seed, AisPhaseTimes* times) {
  if (count == 0) throw std::invalid_argument("sample count must be >= 1");
  if (kernel == Kernel::blocked && !model.layers())
    throw std::invalid_argument("blocked Gibbs needs a layered model");
  WeightedSampleSet ws{SampleSet(model.n(), count), std::vector<double>(count)};
  for (std::size_t mu = 0; mu < count; ++mu) {
    Rng rng(split_seed(seed, mu));
    ws.log_weights[mu] = ais_chain(model, beta_target, schedule, kernel, ws.samples[mu], rng,
                                   nullptr, times);
  }
  ws.samples.meta = {"ais", std::string(to_string(kernel)), schedule.descriptor(), seed,
                     model.hash(), schedule.steps()};
  return ws;
}

double ais_log_weight_ratio(std::span<const SpinConfig> trajectory, const LogDensity& log_density) {
  double log_w = 0.0;
  for (std::size_t k = 1; k <= trajectory.size(); ++k) {
    const auto& x = trajectory[k - 1];
    log_w += log_density(k, x) - log_density(k - 1, x);
  }
  return log_w;
}

LogDensity geometric_path(const IsingModel& model, double beta_target,
                          const AnnealingSchedule& schedule,
                          std::function<double(std::span<const Spin>)> log_initial) {
  return [&model, beta_target, betas = schedule.betas(),
          log_initial = std::move(log_initial)](std::size_t k, std::span<const Spin> x) {
    const double b = betas[k];
    return (1.0 - b) * log_initial(x) - b * beta_target * energy(model, x);
  };
}

AisDiagnostics ais_normalizer(const WeightedSampleSet& ws) {
  const auto& lw = ws.log_weights;
  if (lw.empty()) throw std::invalid_argument("empty weighted sample set");
  AisDiagnostics d;
  d.log_omega = log_sum_exp(lw);
  if (!std::isfinite(d.log_omega)) throw std::runtime_error("degenerate AIS weights");
  double sum_sq = 0.0;
  double max_share = 0.0;
  for (double v : lw) {
    const double share = std::exp(v - d.log_omega);
    sum_sq += share * share;
    max_share = std::max(max_share, share);
  }
  d.ess = 1.0 / sum_sq;
  d.max_weight_share = max_share;
  return d;
}

double free_energy_estimate(const WeightedSampleSet& ws, double beta_target, std::size_t n) {
  if (!(beta_target > 0.0)) throw std::domain_error("free energy estimate needs beta > 0");
  const double log_omega = ais_normalizer(ws).log_omega;
  const double log_n = std::log(static_cast<double>(ws.log_weights.size()));
  return -(static_cast<double>(n) * std::numbers::ln2 + log_omega - log_n) / beta_target;
}

}  // namespace smci
