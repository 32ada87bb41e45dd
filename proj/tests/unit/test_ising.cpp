#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oracles.hpp"
#include "smci/ising.hpp"

using namespace smci;

namespace {

IsingModel two_spin(double j, double h0 = 0.0, double h1 = 0.0) {
  return IsingModel({h0, h1}, {{0, 1, j}});
}

SpinConfig random_config(std::size_t n, Rng& rng) {
  SpinConfig x(n);
  for (auto& s : x) s = rng.coin() ? 1 : -1;
  return x;
}

}  // namespace

TEST_CASE("energy: closed-form cases") {
  IsingModel biased({1.0, 1.0, 1.0}, {});
  CHECK(energy(biased, SpinConfig{1, 1, 1}) == -3.0);
  CHECK(energy(two_spin(1.0), SpinConfig{1, -1}) == 1.0);
  CHECK_THROWS_AS(energy(biased, SpinConfig{1, 1}), std::invalid_argument);
}

TEST_CASE("energy: matches literal dense re-summation and the spin-flip identity") {
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    const auto model = generate_random_graph_model(20, 0.4, {-1.0, 1.0}, rng);
    for (int k = 0; k < 20; ++k) {
      auto x = random_config(20, rng);
      CHECK(energy(model, x) == doctest::Approx(oracle::literal_energy(model, x)).epsilon(1e-13));
      SpinConfig neg(x.size());
      double bias_term = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        neg[i] = static_cast<Spin>(-x[i]);
        bias_term += model.biases()[i] * x[i];
      }
      CHECK(energy(model, neg) == doctest::Approx(energy(model, x) + 2.0 * bias_term).epsilon(1e-13));
    }
  }
}

TEST_CASE("model construction validates its invariants") {
  CHECK_THROWS_AS(IsingModel({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(IsingModel({0.0, 0.0}, {{0, 0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(IsingModel({0.0, 0.0}, {{0, 2, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(IsingModel({0.0, 0.0}, {{0, 1, 1.0}, {1, 0, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(IsingModel({0.0, NAN}, {}), std::invalid_argument);
  CHECK_THROWS_AS(IsingModel({0.0, 0.0}, {{0, 1, INFINITY}}), std::invalid_argument);
  CHECK_THROWS_AS(IsingModel({0.0, 0.0, 0.0}, {{1, 2, 1.0}}, Layers{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(IsingModel({0.0, 0.0, 0.0}, {}, Layers{1, 1}), std::invalid_argument);

  IsingModel single({0.3}, {});
  CHECK(single.n() == 1);
  CHECK(single.neighbors(0).empty());

  IsingModel reversed({0.0, 0.0}, {{1, 0, 0.25}});
  CHECK(reversed.edges()[0].i == 0);
  CHECK(reversed.edges()[0].j == 1);
}

TEST_CASE("coupling lookup is symmetric on generated models") {
  Rng rng(5);
  const auto model = generate_random_graph_model(15, 0.5, {-1.0, 1.0}, rng);
  for (std::size_t i = 0; i < model.n(); ++i) {
    for (std::size_t j = 0; j < model.n(); ++j) CHECK(model.coupling(i, j) == model.coupling(j, i));
  }
  for (const auto& e : model.edges()) CHECK(model.coupling(e.j, e.i) == e.coupling);
}

TEST_CASE("random graph generator") {
  Rng rng(2024);
  CHECK(generate_random_graph_model(20, 0.0, {-1.0, 1.0}, rng).num_edges() == 0);
  CHECK(generate_random_graph_model(20, 1.0, {-1.0, 1.0}, rng).num_edges() == 190);

  Rng fixed(7);
  const auto model = generate_random_graph_model(20, 0.5, {-1.0, 1.0}, fixed);
  CHECK(model.num_edges() >= 60);
  CHECK(model.num_edges() <= 130);
  for (double h : model.biases()) CHECK(std::abs(h) <= 1.0);
  for (const auto& e : model.edges()) CHECK(std::abs(e.coupling) <= 1.0);

  Rng again(7);
  CHECK(generate_random_graph_model(20, 0.5, {-1.0, 1.0}, again).hash() == model.hash());

  CHECK_THROWS_AS(generate_random_graph_model(5, 1.5, {-1.0, 1.0}, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate_random_graph_model(5, -0.1, {-1.0, 1.0}, rng), std::invalid_argument);
}

TEST_CASE("hopfield generator") {
  Rng rng(3);
  const auto pair = generate_hopfield_model(2, 1, rng);
  CHECK(pair.model.coupling(0, 1) ==
        doctest::Approx(0.5 * pair.patterns[0][0] * pair.patterns[1][0]));
  CHECK(std::abs(pair.model.coupling(0, 1)) == 0.5);

  Rng fixed(99);
  const auto inst = generate_hopfield_model(20, 4, fixed);
  CHECK(inst.model.num_edges() == 190);
  for (double h : inst.model.biases()) CHECK(h == 0.0);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = i + 1; j < 20; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < 4; ++k) sum += inst.patterns[i][k] * inst.patterns[j][k];
      CHECK(inst.model.coupling(i, j) == sum / 20.0);
      CHECK(std::abs(inst.model.coupling(i, j)) <= 4.0 / 20.0);
    }
  }
  CHECK_THROWS_AS(generate_hopfield_model(5, 0, rng), std::invalid_argument);
}

TEST_CASE("bipartite generator") {
  Rng rng(8);
  const auto full = generate_bipartite_model(2, 3, 1.0, {-1.0, 1.0}, rng);
  CHECK(full.num_edges() == 6);
  REQUIRE(full.layers().has_value());
  for (const auto& e : full.edges()) CHECK((e.i < 2) != (e.j < 2));

  const auto big = generate_bipartite_model(10, 100, 0.5, {-1.0, 1.0}, rng);
  CHECK(big.n() == 110);
  for (const auto& e : big.edges()) CHECK((e.i < 10) != (e.j < 10));
}

TEST_CASE("local field") {
  IsingModel isolated({0.3}, {});
  CHECK(local_field(isolated, 2.0, 0, SpinConfig{1}).phi == doctest::Approx(0.6));

  CHECK(local_field(two_spin(1.0), 1.0, 0, SpinConfig{1, -1}).phi == -1.0);
  CHECK_THROWS_AS(local_field(isolated, 1.0, 1, SpinConfig{1}), std::invalid_argument);

  Rng rng(12);
  const auto model = generate_random_graph_model(20, 0.3, {-1.0, 1.0}, rng);
  const auto dense = oracle::dense_couplings(model);
  const auto x = random_config(20, rng);
  for (std::size_t i = 0; i < 20; ++i) {
    double expect = model.biases()[i];
    for (std::size_t j = 0; j < 20; ++j) expect += dense[i][j] * x[j];
    CHECK(local_field(model, 0.7, i, x).phi == doctest::Approx(0.7 * expect).epsilon(1e-13));
  }
}

TEST_CASE("exact_solve: closed forms") {
  const auto one = exact_solve(IsingModel({0.5}, {}), 1.0);
  CHECK(one.magnetization[0] == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
  CHECK(one.log_partition == doctest::Approx(std::log(2.0 * std::cosh(0.5))).epsilon(1e-15));
  CHECK(one.free_energy == doctest::Approx(-std::log(2.0 * std::cosh(0.5))).epsilon(1e-15));

  const auto pair = exact_solve(two_spin(1.0), 1.0);
  CHECK(pair.pair_moment[0] == doctest::Approx(0.76159415595576489).epsilon(1e-15));
  CHECK(std::abs(pair.magnetization[0]) < 1e-15);
  CHECK(std::abs(pair.magnetization[1]) < 1e-15);

  for (std::size_t n : {1U, 5U, 12U}) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 0.0});
    const auto sol = exact_solve(IsingModel(std::vector<double>(n, 0.0), edges), 1.7);
    CHECK(sol.log_partition == doctest::Approx(static_cast<double>(n) * std::numbers::ln2).epsilon(1e-14));
    for (double m : sol.magnetization) CHECK(std::abs(m) < 1e-14);
    for (double c : sol.pair_moment) CHECK(std::abs(c) < 1e-14);
  }
}

TEST_CASE("exact_solve: beta = 0 gives the uniform distribution for any model") {
  Rng rng(21);
  const auto model = generate_random_graph_model(10, 0.5, {-1.0, 1.0}, rng);
  const auto sol = exact_solve(model, 0.0);
  CHECK(sol.log_partition == doctest::Approx(10.0 * std::numbers::ln2).epsilon(1e-14));
  CHECK(std::isnan(sol.free_energy));
  for (double m : sol.magnetization) CHECK(std::abs(m) < 1e-14);
  for (double c : sol.pair_moment) CHECK(std::abs(c) < 1e-14);
}

TEST_CASE("exact_solve: agrees with naive long-double enumeration") {
  Rng rng(31);
  for (int rep = 0; rep < 6; ++rep) {
    const auto model = generate_random_graph_model(9, 0.5, {-1.0, 1.0}, rng);
    for (double beta : {0.3, 1.0, 2.0, 50.0}) {
      const auto sol = exact_solve(model, beta);
      const auto naive = oracle::naive_solve(model, beta);
      CHECK(sol.log_partition == doctest::Approx(naive.log_z).epsilon(1e-12));
      for (std::size_t i = 0; i < model.n(); ++i)
        CHECK(std::abs(sol.magnetization[i] - naive.mag[i]) < 1e-11);
      for (std::size_t e = 0; e < model.num_edges(); ++e) {
        CHECK(std::abs(sol.pair_moment[e] - naive.pair[e]) < 1e-11);
        const auto& edge = model.edges()[e];
        CHECK(sol.covariance[e] ==
              sol.pair_moment[e] - sol.magnetization[edge.i] * sol.magnetization[edge.j]);
      }
      for (double m : sol.magnetization) CHECK(std::abs(m) <= 1.0);
    }
  }
}

TEST_CASE("exact_solve: isolated vertices are exactly tanh(beta h)") {
  IsingModel model({0.4, -0.9, 0.2, 0.7}, {{0, 1, 0.8}, {1, 2, -0.5}});
  const auto sol = exact_solve(model, 1.3);
  CHECK(sol.magnetization[3] == doctest::Approx(std::tanh(1.3 * 0.7)).epsilon(1e-15));
}

TEST_CASE("exact_solve: size guard") {
  IsingModel big(std::vector<double>(26, 0.0), {});
  CHECK_THROWS_AS(exact_solve(big, 1.0), std::length_error);
  CHECK_THROWS_AS(exact_solve(IsingModel({0.0}, {}), -1.0), std::invalid_argument);
}

TEST_CASE("exact_solve_bipartite: closed forms and cross-check against full enumeration") {
  IsingModel tiny({0.0, 0.0}, {{0, 1, 1.0}}, Layers{1, 1});
  CHECK(exact_solve_bipartite(tiny, 1.0).pair_moment[0] == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));

  IsingModel free_model({0.3, -0.2, 0.9}, {{0, 1, 0.0}, {0, 2, 0.0}}, Layers{1, 2});
  const auto free_sol = exact_solve_bipartite(free_model, 1.4);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(free_sol.magnetization[i] == doctest::Approx(std::tanh(1.4 * free_model.biases()[i])).epsilon(1e-14));

  Rng rng(41);
  const auto small = generate_bipartite_model(3, 4, 0.5, {-1.0, 1.0}, rng);
  const auto a = exact_solve_bipartite(small, 0.5);
  const auto b = exact_solve(small, 0.5);
  CHECK(std::abs(a.log_partition - b.log_partition) < 1e-10);
  for (std::size_t e = 0; e < small.num_edges(); ++e) CHECK(std::abs(a.pair_moment[e] - b.pair_moment[e]) < 1e-10);

  for (int rep = 0; rep < 10; ++rep) {
    const auto model = generate_bipartite_model(1 + rep % 5, 2 + rep % 7, 0.7, {-1.0, 1.0}, rng);
    for (double beta : {0.0, 0.5, 2.0}) {
      const auto x = exact_solve_bipartite(model, beta);
      const auto y = exact_solve(model, beta);
      CHECK(std::abs(x.log_partition - y.log_partition) < 1e-10);
      for (std::size_t i = 0; i < model.n(); ++i) CHECK(std::abs(x.magnetization[i] - y.magnetization[i]) < 1e-10);
      for (std::size_t e = 0; e < model.num_edges(); ++e) {
        CHECK(std::abs(x.pair_moment[e] - y.pair_moment[e]) < 1e-10);
        CHECK(std::abs(x.covariance[e] - y.covariance[e]) < 1e-10);
      }
    }
  }

  CHECK_THROWS_AS(exact_solve_bipartite(two_spin(1.0), 1.0), std::invalid_argument);
}
