#include "smci/ising.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace smci {

namespace {

void fnv_mix(std::uint64_t& h, std::uint64_t v) noexcept {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
}

void require_beta(double beta) {
  if (!std::isfinite(beta) || beta < 0.0) throw std::invalid_argument("beta must be finite and >= 0");
}

void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability must lie in [0, 1]");
}

void require_range(ParamRange r) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi)
    throw std::invalid_argument("parameter range must be finite with lo <= hi");
}

// Adds w times the moments of the given configuration to the accumulators,
// rescaling everything when the log weight runs ahead of the reference.
class MomentAccumulator {
 public:
  MomentAccumulator(std::size_t n, std::size_t m) : mag_(n, 0.0), pair_(m, 0.0) {}

  // Returns the linear weight to use for this configuration.
  double weight(double log_w) {
    if (!started_) {
      ref_ = log_w;
      started_ = true;
    } else if (log_w > ref_ + kRescaleGap) {
      const double scale = std::exp(ref_ - log_w);
      z_ *= scale;
      for (auto& v : mag_) v *= scale;
      for (auto& v : pair_) v *= scale;
      ref_ = log_w;
    }
    const double w = std::exp(log_w - ref_);
    z_ += w;
    return w;
  }

  std::vector<double>& mag() noexcept { return mag_; }
  std::vector<double>& pair() noexcept { return pair_; }

  ExactSolution finish(double beta) {
    ExactSolution sol;
    sol.beta = beta;
    sol.log_partition = ref_ + std::log(z_);
    sol.free_energy = beta > 0.0 ? -sol.log_partition / beta
                                 : std::numeric_limits<double>::quiet_NaN();
    sol.magnetization.resize(mag_.size());
    for (std::size_t i = 0; i < mag_.size(); ++i) sol.magnetization[i] = mag_[i] / z_;
    sol.pair_moment.resize(pair_.size());
    for (std::size_t e = 0; e < pair_.size(); ++e) sol.pair_moment[e] = pair_[e] / z_;
    return sol;
  }

 private:
  // exp(300) * 2^25 stays far below DBL_MAX.
  static constexpr double kRescaleGap = 300.0;

  bool started_ = false;
  double ref_ = 0.0;
  double z_ = 0.0;
  std::vector<double> mag_;
  std::vector<double> pair_;
};

void fill_covariance(const IsingModel& model, ExactSolution& sol) {
  sol.covariance.resize(model.num_edges());
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    sol.covariance[e] =
        sol.pair_moment[e] - sol.magnetization[edges[e].i] * sol.magnetization[edges[e].j];
  }
}

}  // namespace

IsingModel::IsingModel(std::vector<double> biases, std::vector<Edge> edges,
                       std::optional<Layers> layers)
    : biases_(std::move(biases)), edges_(std::move(edges)), layers_(layers) {
  const std::size_t n = biases_.size();
  if (n == 0) throw std::invalid_argument("model needs at least one vertex");
  for (double h : biases_) {
    if (!std::isfinite(h)) throw std::invalid_argument("non-finite bias");
  }
  if (layers_ && (layers_->n0 == 0 || layers_->n1 == 0 || layers_->n0 + layers_->n1 != n))
    throw std::invalid_argument("layer sizes must be positive and sum to n");

  edge_lookup_.reserve(edges_.size());
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto& edge = edges_[e];
    if (edge.i == edge.j) throw std::invalid_argument("self-edge at vertex " + std::to_string(edge.i));
    if (edge.i >= n || edge.j >= n) throw std::invalid_argument("edge endpoint out of range");
    if (!std::isfinite(edge.coupling)) throw std::invalid_argument("non-finite coupling");
    if (edge.i > edge.j) std::swap(edge.i, edge.j);
    if (layers_ && ((edge.i < layers_->n0) == (edge.j < layers_->n0)))
      throw std::invalid_argument("edge inside a layer of a layered model");
    if (!edge_lookup_.emplace(pair_key(edge.i, edge.j), e).second)
      throw std::invalid_argument("duplicate edge (" + std::to_string(edge.i) + ", " +
                                  std::to_string(edge.j) + ")");
    ++degree[edge.i];
    ++degree[edge.j];
  }

  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_[n]);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& edge : edges_) {
    adjacency_[cursor[edge.i]++] = {edge.j, edge.coupling};
    adjacency_[cursor[edge.j]++] = {edge.i, edge.coupling};
  }
}

std::uint64_t IsingModel::pair_key(std::size_t i, std::size_t j) const noexcept {
  const auto lo = static_cast<std::uint64_t>(std::min(i, j));
  const auto hi = static_cast<std::uint64_t>(std::max(i, j));
  return lo * static_cast<std::uint64_t>(n()) + hi;
}

double IsingModel::coupling(std::size_t i, std::size_t j) const {
  auto idx = edge_index(i, j);
  return idx ? edges_[*idx].coupling : 0.0;
}

std::optional<std::size_t> IsingModel::edge_index(std::size_t i, std::size_t j) const {
  if (i >= n() || j >= n()) throw std::invalid_argument("vertex index out of range");
  if (i == j) return std::nullopt;
  auto it = edge_lookup_.find(pair_key(i, j));
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t IsingModel::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  fnv_mix(h, n());
  for (double b : biases_) fnv_mix(h, std::bit_cast<std::uint64_t>(b));
  for (const auto& e : edges_) {
    fnv_mix(h, e.i);
    fnv_mix(h, e.j);
    fnv_mix(h, std::bit_cast<std::uint64_t>(e.coupling));
  }
  if (layers_) {
    fnv_mix(h, layers_->n0);
    fnv_mix(h, layers_->n1);
  }
  return h;
}

double energy(const IsingModel& model, std::span<const Spin> x) {
  if (x.size() != model.n()) throw std::invalid_argument("configuration length does not match model");
  double e = 0.0;
  const auto& h = model.biases();
  for (std::size_t i = 0; i < h.size(); ++i) e -= h[i] * x[i];
  for (const auto& edge : model.edges()) e -= edge.coupling * x[edge.i] * x[edge.j];
  return e;
}

ConditionalField local_field(const IsingModel& model, double beta, std::size_t i,
                             std::span<const Spin> s) {
  if (i >= model.n()) throw std::invalid_argument("vertex index out of range");
  if (s.size() != model.n()) throw std::invalid_argument("configuration length does not match model");
  return {beta * detail::field_sum(model, i, s.data())};
}

IsingModel generate_random_graph_model(std::size_t n, double p, ParamRange range, Rng& rng) {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  require_probability(p);
  require_range(range);
  std::vector<double> biases(n);
  for (auto& h : biases) h = rng.uniform(range.lo, range.hi);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) edges.push_back({i, j, rng.uniform(range.lo, range.hi)});
    }
  }
  return IsingModel(std::move(biases), std::move(edges));
}

HopfieldInstance generate_hopfield_model(std::size_t n, std::size_t m, Rng& rng) {
  if (n == 0 || m == 0) throw std::invalid_argument("hopfield model needs n >= 1 and m >= 1");
  std::vector<std::vector<Spin>> xi(n, std::vector<Spin>(m));
  for (auto& row : xi) {
    for (auto& v : row) v = rng.coin() ? Spin{1} : Spin{-1};
  }
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      int overlap = 0;
      for (std::size_t k = 0; k < m; ++k) overlap += xi[i][k] * xi[j][k];
      edges.push_back({i, j, static_cast<double>(overlap) / static_cast<double>(n)});
    }
  }
  return {IsingModel(std::vector<double>(n, 0.0), std::move(edges)), std::move(xi)};
}

IsingModel generate_bipartite_model(std::size_t n0, std::size_t n1, double p, ParamRange range,
                                    Rng& rng) {
  if (n0 == 0 || n1 == 0) throw std::invalid_argument("both layers need at least one vertex");
  require_probability(p);
  require_range(range);
  const std::size_t n = n0 + n1;
  std::vector<double> biases(n);
  for (auto& h : biases) h = rng.uniform(range.lo, range.hi);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t j = n0; j < n; ++j) {
      if (rng.uniform() < p) edges.push_back({i, j, rng.uniform(range.lo, range.hi)});
    }
  }
  return IsingModel(std::move(biases), std::move(edges), Layers{n0, n1});
}

ExactSolution exact_solve(const IsingModel& model, double beta) {
  require_beta(beta);
  const std::size_t n = model.n();
  if (n > kExactMaxVertices)
    throw std::length_error("exact_solve refuses n = " + std::to_string(n) + " (limit " +
                            std::to_string(kExactMaxVertices) + ")");

  const auto& edges = model.edges();
  std::vector<std::size_t> ea(edges.size()), eb(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    ea[e] = edges[e].i;
    eb[e] = edges[e].j;
  }

  // Gray-code walk starting from all spins down.
  SpinConfig x(n, Spin{-1});
  std::vector<double> xd(n, -1.0);
  double e_cur = energy(model, x);
  MomentAccumulator acc(n, edges.size());
  const std::uint64_t total = std::uint64_t{1} << n;
  constexpr std::uint64_t kResync = 4096;

  for (std::uint64_t step = 0; step < total; ++step) {
    if (step > 0) {
      const auto flip = static_cast<std::size_t>(std::countr_zero(step));
      // E(x with x_i flipped) - E(x) = 2 x_i (h_i + sum_j J_ij x_j)
      e_cur += 2.0 * xd[flip] * detail::field_sum(model, flip, x.data());
      x[flip] = static_cast<Spin>(-x[flip]);
      xd[flip] = -xd[flip];
      if (step % kResync == 0) e_cur = energy(model, x);
    }
    const double w = acc.weight(-beta * e_cur);
    auto& mag = acc.mag();
    for (std::size_t i = 0; i < n; ++i) mag[i] += w * xd[i];
    auto& pair = acc.pair();
    for (std::size_t e = 0; e < ea.size(); ++e) pair[e] += w * xd[ea[e]] * xd[eb[e]];
  }

  ExactSolution sol = acc.finish(beta);
  fill_covariance(model, sol);
  return sol;
}

ExactSolution exact_solve_bipartite(const IsingModel& model, double beta) {
  require_beta(beta);
  if (!model.layers()) throw std::invalid_argument("exact_solve_bipartite needs layer metadata");
  const std::size_t n0 = model.layers()->n0;
  const std::size_t n = model.n();
  if (n0 > kExactMaxVertices)
    throw std::length_error("exact_solve_bipartite refuses |V0| = " + std::to_string(n0));

  const auto& h = model.biases();
  const auto& edges = model.edges();
  // Every edge has i in layer 0 and j in layer 1 (enforced by the model).
  std::vector<double> theta(n - n0);  // h_j + sum_k J_kj x_k for layer-1 vertices
  std::vector<double> tanh_theta(n - n0);
  std::vector<double> x0(n0);
  MomentAccumulator acc(n, edges.size());

  const std::uint64_t total = std::uint64_t{1} << n0;
  for (std::uint64_t code = 0; code < total; ++code) {
    for (std::size_t i = 0; i < n0; ++i) x0[i] = ((code >> i) & 1U) ? 1.0 : -1.0;
    double log_w = 0.0;
    for (std::size_t i = 0; i < n0; ++i) log_w += beta * h[i] * x0[i];
    for (std::size_t j = n0; j < n; ++j) theta[j - n0] = h[j];
    for (const auto& e : edges) theta[e.j - n0] += e.coupling * x0[e.i];
    for (std::size_t t = 0; t < theta.size(); ++t) {
      // ln(2 cosh a) = |a| + log1p(exp(-2|a|))
      const double a = std::abs(beta * theta[t]);
      log_w += a + std::log1p(std::exp(-2.0 * a));
      tanh_theta[t] = std::tanh(beta * theta[t]);
    }
    const double w = acc.weight(log_w);
    auto& mag = acc.mag();
    for (std::size_t i = 0; i < n0; ++i) mag[i] += w * x0[i];
    for (std::size_t j = n0; j < n; ++j) mag[j] += w * tanh_theta[j - n0];
    auto& pair = acc.pair();
    for (std::size_t e = 0; e < edges.size(); ++e)
      pair[e] += w * x0[edges[e].i] * tanh_theta[edges[e].j - n0];
  }

  ExactSolution sol = acc.finish(beta);
  fill_covariance(model, sol);
  return sol;
}

}  // namespace smci
