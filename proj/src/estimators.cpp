#include "smci/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace smci {

namespace {

void require_samples(const IsingModel& model, const SampleSet& samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  if (samples.n() != model.n()) throw std::invalid_argument("sample width does not match model");
}

double pair_summand(double phi_i, double phi_j, double beta_j, Spin s_i, Spin s_j) noexcept {
  const double psi_ij = phi_i - beta_j * s_j;
  const double psi_ji = phi_j - beta_j * s_i;
  const double t = std::clamp(std::tanh(psi_ij) * std::tanh(psi_ji), -1.0 + kAtanhClamp,
                              1.0 - kAtanhClamp);
  return std::tanh(std::atanh(t) + beta_j);
}

void fill_covariance(const IsingModel& model, MomentReport& r) {
  const auto& edges = model.edges();
  r.covariance.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e)
    r.covariance[e] = r.pair_moment[e] - r.magnetization[edges[e].i] * r.magnetization[edges[e].j];
}

// Accumulates per-sample summands with weight `weights[mu]`, or 1/N when
// `weights` is empty. Fixed order over mu.
MomentReport accumulate(const IsingModel& model, double beta, const SampleSet& samples,
                        std::span<const double> weights, WeightedMode mode) {
  const std::size_t n = model.n();
  const auto& edges = model.edges();
  MomentReport r;
  r.magnetization.assign(n, 0.0);
  r.pair_moment.assign(edges.size(), 0.0);
  r.n_samples = samples.size();

  std::vector<double> phi(n);
  for (std::size_t mu = 0; mu < samples.size(); ++mu) {
    const auto s = samples[mu];
    const double w = weights.empty() ? 1.0 : weights[mu];
    if (w == 0.0) continue;
    if (mode == WeightedMode::mci) {
      for (std::size_t i = 0; i < n; ++i) r.magnetization[i] += w * s[i];
      for (std::size_t e = 0; e < edges.size(); ++e)
        r.pair_moment[e] += w * (s[edges[e].i] * s[edges[e].j]);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        phi[i] = beta * detail::field_sum(model, i, s.data());
        r.magnetization[i] += w * std::tanh(phi[i]);
      }
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& edge = edges[e];
        r.pair_moment[e] +=
            w * pair_summand(phi[edge.i], phi[edge.j], beta * edge.coupling, s[edge.i], s[edge.j]);
      }
    }
  }
  if (weights.empty()) {
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (auto& v : r.magnetization) v *= inv;
    for (auto& v : r.pair_moment) v *= inv;
  }
  fill_covariance(model, r);
  return r;
}

}  // namespace

MomentReport mci_moments(const IsingModel& model, const SampleSet& samples) {
  require_samples(model, samples);
  auto r = accumulate(model, 0.0, samples, {}, WeightedMode::mci);
  r.method = "mci";
  return r;
}

double smci1_magnetization(const IsingModel& model, double beta, const SampleSet& samples,
                           std::size_t i) {
  require_samples(model, samples);
  if (i >= model.n()) throw std::invalid_argument("vertex index out of range");
  double acc = 0.0;
  for (std::size_t mu = 0; mu < samples.size(); ++mu)
    acc += std::tanh(beta * detail::field_sum(model, i, samples[mu].data()));
  return acc / static_cast<double>(samples.size());
}

double smci1_pair_moment(const IsingModel& model, double beta, const SampleSet& samples,
                         std::size_t i, std::size_t j) {
  require_samples(model, samples);
  const auto idx = model.edge_index(i, j);
  if (!idx) throw std::invalid_argument("(i, j) is not an edge of the model");
  const double beta_j = beta * model.edges()[*idx].coupling;
  double acc = 0.0;
  for (std::size_t mu = 0; mu < samples.size(); ++mu) {
    const auto s = samples[mu];
    const double phi_i = beta * detail::field_sum(model, i, s.data());
    const double phi_j = beta * detail::field_sum(model, j, s.data());
    acc += pair_summand(phi_i, phi_j, beta_j, s[i], s[j]);
  }
  return acc / static_cast<double>(samples.size());
}

MomentReport smci1_moments(const IsingModel& model, double beta, const SampleSet& samples) {
  require_samples(model, samples);
  auto r = accumulate(model, beta, samples, {}, WeightedMode::smci1);
  r.method = "smci";
  return r;
}

MomentReport weighted_moments(const IsingModel& model, double beta, const WeightedSampleSet& ws,
                              WeightedMode mode) {
  require_samples(model, ws.samples);
  if (ws.log_weights.size() != ws.samples.size())
    throw std::invalid_argument("weight count does not match sample count");
  for (double v : ws.log_weights) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw std::invalid_argument("log weights must be finite or -inf");
  }
  const double log_omega = log_sum_exp(ws.log_weights);
  if (!std::isfinite(log_omega)) throw std::runtime_error("degenerate weights: all log weights are -inf");

  std::vector<double> share(ws.log_weights.size());
  double sum_sq = 0.0;
  for (std::size_t mu = 0; mu < share.size(); ++mu) {
    share[mu] = std::exp(ws.log_weights[mu] - log_omega);
    sum_sq += share[mu] * share[mu];
  }
  auto r = accumulate(model, beta, ws.samples, share, mode);
  r.method = mode == WeightedMode::mci ? "ais" : "ais+smci";
  r.ess = 1.0 / sum_sq;
  return r;
}

MaeResult mae(const ExactSolution& exact, const MomentReport& approx) {
  if (exact.covariance.size() != approx.covariance.size())
    throw std::invalid_argument("edge sets of exact and approximate moments differ");
  MaeResult out;
  out.per_edge_abs_err.resize(exact.covariance.size());
  double acc = 0.0;
  for (std::size_t e = 0; e < exact.covariance.size(); ++e) {
    out.per_edge_abs_err[e] = std::abs(exact.covariance[e] - approx.covariance[e]);
    acc += out.per_edge_abs_err[e];
  }
  out.mae = out.per_edge_abs_err.empty() ? 0.0 : acc / static_cast<double>(out.per_edge_abs_err.size());
  return out;
}

EstimatorVariance empirical_estimator_variance(std::span<const MomentReport> runs) {
  if (runs.size() < 2) throw std::invalid_argument("variance needs at least two runs");
  const auto& first = runs.front();
  for (const auto& r : runs) {
    if (r.magnetization.size() != first.magnetization.size() ||
        r.pair_moment.size() != first.pair_moment.size())
      throw std::invalid_argument("runs must share the same model");
  }
  auto column_variance = [&runs](auto field) {
    const std::size_t len = (runs.front().*field).size();
    std::vector<double> var(len, 0.0);
    const double count = static_cast<double>(runs.size());
    for (std::size_t q = 0; q < len; ++q) {
      double mean = 0.0;
      for (const auto& r : runs) mean += (r.*field)[q];
      mean /= count;
      double ss = 0.0;
      for (const auto& r : runs) ss += ((r.*field)[q] - mean) * ((r.*field)[q] - mean);
      var[q] = ss / (count - 1.0);
    }
    return var;
  };
  return {column_variance(&MomentReport::magnetization), column_variance(&MomentReport::pair_moment),
          column_variance(&MomentReport::covariance)};
}

}  // namespace smci
