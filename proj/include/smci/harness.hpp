#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "smci/ising.hpp"
#include "smci/samplers.hpp"

namespace smci {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Family { random, hopfield, bipartite };
enum class Method { exact, mci, smci, ais, ais_smci, pt_smci };

std::string_view to_string(Family f) noexcept;
Family family_from_string(std::string_view s);
std::string_view to_string(Method m) noexcept;
Method method_from_string(std::string_view s);

/// One experiment: a model family, grids over beta, N and K, and the
/// estimators to compare on every trial.
struct ExperimentSpec {
  Family family = Family::random;
  std::size_t n = 20;
  double p = 0.2;       // edge probability (random, bipartite)
  double alpha = 0.2;   // pattern ratio m / n (hopfield)
  std::size_t n0 = 10;  // bipartite layer sizes
  std::size_t n1 = 100;
  ParamRange range{-1.0, 1.0};
  std::vector<double> betas{0.5};
  std::vector<std::size_t> sample_counts{1000};
  std::vector<std::size_t> anneal_steps{1000};
  std::vector<Method> methods{Method::mci, Method::smci, Method::ais, Method::ais_smci};
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  Kernel kernel = Kernel::gibbs;
  PtConfig pt{};  // total_samples is taken from the N grid
  std::string output;

  /// Throws std::invalid_argument when the spec cannot be run, and
  /// std::length_error when `exact_oracle` is set and the model is too large
  /// to enumerate.
  void validate(bool exact_oracle = true) const;
  /// p for random/bipartite, alpha for hopfield.
  double family_param() const noexcept;
  std::size_t vertex_count() const noexcept;

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

void to_json(nlohmann::json& j, const ExperimentSpec& spec);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, ExperimentSpec& spec);

/// Draws the model of one trial.
IsingModel make_model(const ExperimentSpec& spec, std::uint64_t model_seed);

/// Exact oracle appropriate for the family.
ExactSolution solve_exact(const ExperimentSpec& spec, const IsingModel& model, double beta);

struct PhaseTimes {
  double sampling_ms = 0.0;
  double weights_ms = 0.0;
  double expectations_ms = 0.0;

  friend bool operator==(const PhaseTimes&, const PhaseTimes&) = default;
};

struct SweepRow {
  double beta = 0.0;
  std::size_t sample_count = 0;
  std::size_t anneal_steps = 0;
  Method method = Method::exact;
  std::size_t trials = 0;
  double mae_mean = 0.0;
  double mae_stderr = 0.0;
  std::vector<double> trial_mae;  // per-trial MAE in trial order (paired across methods)
  PhaseTimes timing;              // mean per trial

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepResult {
  ExperimentSpec spec;
  std::string rng;
  std::string version;
  std::vector<SweepRow> rows;

  /// Row for (beta, N, K, method); throws std::out_of_range when absent.
  const SweepRow& row(double beta, std::size_t n_samples, std::size_t steps, Method m) const;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Worker count from SMCI_WORKERS, else hardware concurrency (at least 1).
std::size_t default_worker_count();

/// Runs every trial of the spec. Trial t draws its model from
/// split_seed(split_seed(seed, t), 0); each grid point g uses streams
/// 3g+1 (annealed set), 3g+2 (AIS) and 3g+3 (PT) of the trial seed. MCI and
/// SMCI share one annealed set; AIS and AIS+SMCI share one weighted set.
/// Results do not depend on `workers`.
SweepResult run_sweep(const ExperimentSpec& spec, std::size_t workers = 0);

struct PhaseRow {
  std::string method;  // "ais" or "proposed"
  double sampling_ms = 0.0;
  double weights_ms = 0.0;
  double expectations_ms = 0.0;
  double total_s = 0.0;

  /// Expectation share of the total, 0 for an all-zero row.
  double expectation_fraction() const noexcept;
};

struct PhaseTable {
  std::size_t n = 0;
  std::size_t edges = 0;
  std::size_t sample_count = 0;
  std::size_t anneal_steps = 0;
  std::size_t repeats = 0;
  std::vector<PhaseRow> rows;
};

/// Median wall-clock over `repeats` runs of the three AIS phases
/// (trajectory sampling, weight evaluation, expectations) for the first
/// grid point of the spec. Sampling and weights are shared by both rows.
PhaseTable time_phases(const ExperimentSpec& spec, std::size_t repeats = 3);

/// Columns: family,param,beta,method,N,K,trials,mae_mean,mae_stderr
void emit_csv(std::ostream& out, const SweepResult& result);
nlohmann::json sweep_to_json(const SweepResult& result);
SweepResult sweep_from_json(const nlohmann::json& j);

void emit_phase_csv(std::ostream& out, const PhaseTable& table);
nlohmann::json phase_to_json(const PhaseTable& table);

}  // namespace smci
