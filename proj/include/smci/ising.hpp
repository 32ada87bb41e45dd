#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "smci/rng.hpp"

namespace smci {

using Spin = std::int8_t;
using SpinConfig = std::vector<Spin>;

/// Undirected coupling. Stored with i < j.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double coupling = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Two-layer partition: vertices [0, n0) form layer 0, [n0, n0 + n1) layer 1.
struct Layers {
  std::size_t n0 = 0;
  std::size_t n1 = 0;

  friend bool operator==(const Layers&, const Layers&) = default;
};

struct Neighbor {
  std::size_t vertex;
  double coupling;
};

/// Half-open interval [lo, hi) for uniform parameter draws.
struct ParamRange {
  double lo = -1.0;
  double hi = 1.0;

  friend bool operator==(const ParamRange&, const ParamRange&) = default;
};

/// Ising model with energy E(x) = -sum_i h_i x_i - sum_{(i,j)} J_ij x_i x_j.
///
/// Immutable after construction. Couplings are keyed on the unordered pair,
/// so coupling(i, j) == coupling(j, i) always. Neighbor lists are built once
/// in CSR form for O(deg) local-field evaluation.
class IsingModel {
 public:
  /// Throws std::invalid_argument on self-edges, duplicate edges,
  /// out-of-range endpoints, non-finite parameters, or (with layers) edges
  /// inside a layer.
  IsingModel(std::vector<double> biases, std::vector<Edge> edges,
             std::optional<Layers> layers = std::nullopt);

  std::size_t n() const noexcept { return biases_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<double>& biases() const noexcept { return biases_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::optional<Layers>& layers() const noexcept { return layers_; }

  std::span<const Neighbor> neighbors(std::size_t i) const noexcept {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }

  /// J_ij, or 0 when (i, j) is not an edge.
  double coupling(std::size_t i, std::size_t j) const;
  std::optional<std::size_t> edge_index(std::size_t i, std::size_t j) const;

  /// FNV-1a over n, the bias bit patterns and the edge list.
  std::uint64_t hash() const noexcept;

 private:
  std::uint64_t pair_key(std::size_t i, std::size_t j) const noexcept;

  std::vector<double> biases_;
  std::vector<Edge> edges_;
  std::optional<Layers> layers_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::unordered_map<std::uint64_t, std::size_t> edge_lookup_;
};

/// Local field phi_i = beta h_i + beta sum_{j in N(i)} J_ij s_j.
struct ConditionalField {
  double phi = 0.0;
};

/// Throws std::invalid_argument when x.size() != model.n().
double energy(const IsingModel& model, std::span<const Spin> x);

/// Throws std::invalid_argument on an out-of-range vertex or size mismatch.
ConditionalField local_field(const IsingModel& model, double beta, std::size_t i,
                             std::span<const Spin> s);

namespace detail {
// Unchecked form used by the kernels and estimators.
inline double field_sum(const IsingModel& model, std::size_t i, const Spin* s) noexcept {
  double acc = model.biases()[i];
  for (const auto& nb : model.neighbors(i)) acc += nb.coupling * s[nb.vertex];
  return acc;
}
}  // namespace detail

/// Each of the n(n-1)/2 candidate edges is kept with probability p; h_i and
/// J_ij are i.i.d. uniform on `range`. Draw order: biases 0..n-1, then for
/// each pair (i < j) in lexicographic order one inclusion draw followed by a
/// coupling draw if included.
IsingModel generate_random_graph_model(std::size_t n, double p, ParamRange range, Rng& rng);

struct HopfieldInstance {
  IsingModel model;
  /// patterns[i][k] = xi_{i,k}
  std::vector<std::vector<Spin>> patterns;
};

/// J_ij = (1/n) sum_k xi_{i,k} xi_{j,k} on the complete graph, h = 0.
HopfieldInstance generate_hopfield_model(std::size_t n, std::size_t m, Rng& rng);

/// Edges only between layers, each present with probability p.
IsingModel generate_bipartite_model(std::size_t n0, std::size_t n1, double p, ParamRange range,
                                    Rng& rng);

struct ExactSolution {
  double beta = 0.0;
  double log_partition = 0.0;
  double free_energy = 0.0;  // -ln Z / beta; NaN at beta = 0
  std::vector<double> magnetization;
  std::vector<double> pair_moment;  // indexed like model.edges()
  std::vector<double> covariance;
};

inline constexpr std::size_t kExactMaxVertices = 25;

/// Exhaustive sum over 2^n configurations in Gray-code order.
/// Throws std::length_error when n > kExactMaxVertices.
ExactSolution exact_solve(const IsingModel& model, double beta);

/// O(2^{n0}) solution for layered models, marginalising layer 1 analytically.
/// Throws std::invalid_argument without layers, std::length_error when
/// n0 > kExactMaxVertices.
ExactSolution exact_solve_bipartite(const IsingModel& model, double beta);

}  // namespace smci
