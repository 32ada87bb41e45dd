// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Pass criterion numbers as arguments to run
// a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "smci/ais.hpp"
#include "smci/estimators.hpp"
#include "smci/harness.hpp"

using namespace smci;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Trials where a beats b (strictly smaller error).
std::size_t wins(const std::vector<double>& a, const std::vector<double>& b) {
  std::size_t w = 0;
  for (std::size_t t = 0; t < a.size(); ++t) w += a[t] < b[t];
  return w;
}

struct SignTest {
  std::size_t wins;
  std::size_t trials;
  double p_value;
  bool significant() const { return p_value < 0.05; }
};

SignTest sign_test(const std::vector<double>& better, const std::vector<double>& worse) {
  const std::size_t w = wins(better, worse);
  return {w, better.size(), oracle::sign_test_p_value(w, better.size())};
}

ExperimentSpec random_spec(double p, std::vector<double> betas, std::uint64_t seed) {
  ExperimentSpec spec;
  spec.family = Family::random;
  spec.n = 20;
  spec.p = p;
  spec.betas = std::move(betas);
  spec.sample_counts = {1000};
  spec.anneal_steps = {1000};
  spec.trials = 50;
  spec.seed = seed;
  return spec;
}

// 1. Closed forms against literal conditional sums; bipartite oracle
// against full enumeration.
Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst_smci = 0.0, worst_bip = 0.0;
  for (int m = 0; m < 20; ++m) {
    const std::size_t n = 6 + m % 7;
    const auto model = generate_random_graph_model(n, 0.5, {-1.0, 1.0}, rng);
    const double beta = 0.25 + 0.25 * (m % 8);
    const auto samples = annealed_sample_set(model, beta, AnnealingSchedule::linear(10), Kernel::gibbs,
                                             30, rng());
    const auto r = smci1_moments(model, beta, samples);
    for (std::size_t i = 0; i < n; ++i) {
      worst_smci = std::max(worst_smci, std::abs(r.magnetization[i] - oracle::literal_smci(model, beta, samples, {i})));
      worst_smci = std::max(worst_smci, std::abs(smci1_magnetization(model, beta, samples, i) -
                                                 oracle::literal_smci(model, beta, samples, {i})));
    }
    for (std::size_t e = 0; e < model.num_edges(); ++e) {
      const auto& edge = model.edges()[e];
      const double lit = oracle::literal_smci(model, beta, samples, {edge.i, edge.j});
      worst_smci = std::max(worst_smci, std::abs(r.pair_moment[e] - lit));
      worst_smci = std::max(worst_smci, std::abs(smci1_pair_moment(model, beta, samples, edge.i, edge.j) - lit));
    }

    const std::size_t n0 = 1 + m % 4;
    const std::size_t n1 = std::min<std::size_t>(12 - n0, 2 + m % 9);
    const auto bip = generate_bipartite_model(n0, n1, 0.7, {-1.0, 1.0}, rng);
    const auto a = exact_solve_bipartite(bip, beta);
    const auto b = exact_solve(bip, beta);
    worst_bip = std::max(worst_bip, std::abs(a.log_partition - b.log_partition));
    for (std::size_t i = 0; i < bip.n(); ++i)
      worst_bip = std::max(worst_bip, std::abs(a.magnetization[i] - b.magnetization[i]));
    for (std::size_t e = 0; e < bip.num_edges(); ++e) {
      worst_bip = std::max(worst_bip, std::abs(a.pair_moment[e] - b.pair_moment[e]));
      worst_bip = std::max(worst_bip, std::abs(a.covariance[e] - b.covariance[e]));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst_smci <= 1e-12 && worst_bip <= 1e-10 && secs < 60.0,
          fmt("max |smci - literal| = %.2e, max |bipartite - full| = %.2e, %.1fs", worst_smci, worst_bip, secs)};
}

// 2. Dense transition matrices leave the Boltzmann vector invariant.
Outcome kernel_stationarity() {
  Rng rng(1002);
  double gibbs = 0.0, blocked = 0.0, swap = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      const auto model = generate_random_graph_model(n, 0.8, {-1.0, 1.0}, rng);
      for (double beta : {0.0, 0.5, 2.0}) {
        const auto t = oracle::transition_matrix(n, n, [&](std::span<Spin> x, const auto& draw) {
          gibbs_sweep_with(model, beta, x, draw);
        });
        gibbs = std::max(gibbs, oracle::stationarity_residual(t, oracle::boltzmann(model, beta)));
      }
    }
  }
  for (std::size_t n0 = 1; n0 <= 2; ++n0) {
    for (std::size_t n1 = 1; n1 <= 2; ++n1) {
      const auto model = generate_bipartite_model(n0, n1, 1.0, {-1.0, 1.0}, rng);
      for (double beta : {0.5, 2.0}) {
        const auto t = oracle::transition_matrix(n0 + n1, n0 + n1, [&](std::span<Spin> x, const auto& draw) {
          blocked_sweep_with(model, beta, x, draw);
        });
        blocked = std::max(blocked, oracle::stationarity_residual(t, oracle::boltzmann(model, beta)));
      }
    }
  }
  for (int rep = 0; rep < 3; ++rep) {
    const auto model = generate_random_graph_model(2, 1.0, {-1.0, 1.0}, rng);
    const std::vector<double> betas{2.0, 0.3 + 0.2 * rep};
    const auto cold = oracle::boltzmann(model, betas[0]);
    const auto hot = oracle::boltzmann(model, betas[1]);
    std::vector<double> joint(16);
    for (std::size_t c = 0; c < 16; ++c) joint[c] = cold[c & 3U] * hot[c >> 2];
    const auto t = oracle::transition_matrix(4, 1, [&](std::span<Spin> x, const auto& draw) {
      std::vector<SpinConfig> states{{x[0], x[1]}, {x[2], x[3]}};
      std::vector<double> energies{energy(model, states[0]), energy(model, states[1])};
      swap_pass_with(betas, states, energies, 0, draw);
      std::copy(states[0].begin(), states[0].end(), x.begin());
      std::copy(states[1].begin(), states[1].end(), x.begin() + 2);
    });
    swap = std::max(swap, oracle::stationarity_residual(t, joint));
  }
  return {gibbs <= 1e-12 && blocked <= 1e-12 && swap <= 1e-12,
          fmt("residuals: gibbs %.1e, blocked %.1e, swap %.1e", gibbs, blocked, swap)};
}

// Shared by criteria 3 and 4: one sweep per edge density with both betas.
struct OrderingRuns {
  std::vector<SweepResult> by_p;  // p = 0.2, 0.8
};

const OrderingRuns& ordering_runs() {
  static const OrderingRuns runs = [] {
    OrderingRuns r;
    for (double p : {0.2, 0.8}) {
      auto spec = random_spec(p, {0.5, 2.0}, 2024);
      r.by_p.push_back(run_sweep(spec, default_worker_count()));
    }
    return r;
  }();
  return runs;
}

// 3. beta = 0.5: SMCI beats MCI; AIS+SMCI within 10% of SMCI.
Outcome high_temperature_ordering() {
  bool ok = true;
  std::string detail;
  const double ps[] = {0.2, 0.8};
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& res = ordering_runs().by_p[k];
    const double mci = res.row(0.5, 1000, 1000, Method::mci).mae_mean;
    const double smci = res.row(0.5, 1000, 1000, Method::smci).mae_mean;
    const double ais_smci = res.row(0.5, 1000, 1000, Method::ais_smci).mae_mean;
    ok = ok && smci < mci && ais_smci <= 1.1 * smci;
    detail += fmt("p=%.1f: mci %.4g smci %.4g ais+smci %.4g; ", ps[k], mci, smci, ais_smci);
  }
  return {ok, detail};
}

// Criterion 4 ordering on the four rows of one grid point.
Outcome low_temperature_checks(const SweepResult& res, double beta, std::size_t n, std::size_t k,
                               const std::string& label) {
  const auto& mci = res.row(beta, n, k, Method::mci);
  const auto& smci = res.row(beta, n, k, Method::smci);
  const auto& ais = res.row(beta, n, k, Method::ais);
  const auto& ais_smci = res.row(beta, n, k, Method::ais_smci);
  const auto s1 = sign_test(ais.trial_mae, mci.trial_mae);
  const auto s2 = sign_test(ais_smci.trial_mae, smci.trial_mae);
  const auto s3 = sign_test(ais_smci.trial_mae, ais.trial_mae);
  const bool ok = ais.mae_mean < mci.mae_mean && s1.significant() &&
                  ais_smci.mae_mean < smci.mae_mean && s2.significant() &&
                  ais_smci.mae_mean <= ais.mae_mean && s3.significant();
  return {ok, fmt("%s: mci %.4g smci %.4g ais %.4g ais+smci %.4g; wins ais<mci %zu/%zu (p=%.2g), "
                  "ais+smci<smci %zu/%zu (p=%.2g), ais+smci<ais %zu/%zu (p=%.2g); ",
                  label.c_str(), mci.mae_mean, smci.mae_mean, ais.mae_mean, ais_smci.mae_mean, s1.wins,
                  s1.trials, s1.p_value, s2.wins, s2.trials, s2.p_value, s3.wins, s3.trials, s3.p_value)};
}

// 4. beta = 2: AIS beats MCI, AIS+SMCI beats SMCI and AIS (sign tests).
Outcome low_temperature_ordering() {
  Outcome out{true, ""};
  const char* labels[] = {"p=0.2", "p=0.8"};
  for (std::size_t k = 0; k < 2; ++k) {
    const auto r = low_temperature_checks(ordering_runs().by_p[k], 2.0, 1000, 1000, labels[k]);
    out.pass = out.pass && r.pass;
    out.detail += r.detail;
  }
  return out;
}

// 5. AIS+SMCI error decays like N^-1/2 while MCI stalls.
Outcome n_scaling() {
  auto spec = random_spec(0.2, {2.0}, 3031);
  spec.sample_counts = {100, 316, 1000, 3162};
  spec.methods = {Method::mci, Method::ais_smci};
  const auto res = run_sweep(spec, default_worker_count());
  std::vector<double> ns, mci, proposed;
  for (std::size_t n : spec.sample_counts) {
    ns.push_back(static_cast<double>(n));
    mci.push_back(res.row(2.0, n, 1000, Method::mci).mae_mean);
    proposed.push_back(res.row(2.0, n, 1000, Method::ais_smci).mae_mean);
  }
  const double slope_p = oracle::log_log_slope(ns, proposed);
  const double slope_m = oracle::log_log_slope(ns, mci);
  std::string detail = fmt("slope ais+smci %.3f, slope mci %.3f; mae mci", slope_p, slope_m);
  for (double v : mci) detail += fmt(" %.4g", v);
  detail += "; ais+smci";
  for (double v : proposed) detail += fmt(" %.4g", v);
  return {std::abs(slope_p + 0.5) <= 0.15 && slope_m > -0.3, detail};
}

// 6. AIS+SMCI error at K = 1000 within 20% of K = 500.
Outcome k_saturation() {
  auto spec = random_spec(0.2, {2.0}, 4041);
  spec.anneal_steps = {500, 1000};
  spec.methods = {Method::ais_smci};
  const auto res = run_sweep(spec, default_worker_count());
  const double at500 = res.row(2.0, 1000, 500, Method::ais_smci).mae_mean;
  const double at1000 = res.row(2.0, 1000, 1000, Method::ais_smci).mae_mean;
  const double rel = std::abs(at1000 - at500) / at500;
  return {rel <= 0.2, fmt("mae K=500 %.4g, K=1000 %.4g, relative change %.3f", at500, at1000, rel)};
}

// 7. Free-energy estimate agrees with enumeration.
Outcome free_energy() {
  Rng rng(5051);
  const auto model = generate_random_graph_model(20, 0.2, {-1.0, 1.0}, rng);
  const auto sched = AnnealingSchedule::linear(1000);
  bool ok = true;
  std::string detail;
  for (double beta : {0.5, 1.0, 2.0}) {
    const double f = exact_solve(model, beta).free_energy;
    std::vector<double> est;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto ws = run_ais(model, beta, sched, Kernel::gibbs, 1000, split_seed(5052, s));
      est.push_back(free_energy_estimate(ws, beta, model.n()));
    }
    const double m = mean(est);
    double ss = 0.0;
    for (double v : est) ss += (v - m) * (v - m);
    const double se = std::sqrt(ss / 19.0) / std::sqrt(20.0);
    ok = ok && std::abs(m - f) <= 3.0 * se;
    detail += fmt("beta=%.1f: F %.6f, mean F^ %.6f, se %.2e; ", beta, f, m, se);
  }
  IsingModel zero(std::vector<double>(20, 0.0), {});
  for (double beta : {0.5, 1.0, 2.0}) {
    const auto ws = run_ais(zero, beta, AnnealingSchedule::linear(10), Kernel::gibbs, 100, 7);
    const double expect = -(20.0 * std::numbers::ln2) / beta;
    const double got = free_energy_estimate(ws, beta, 20);
    ok = ok && got == expect;
    if (got != expect) detail += fmt("zero model beta=%.1f: %.17g != %.17g; ", beta, got, expect);
  }
  detail += "zero model exact";
  return {ok, detail};
}

// 8. Mean AIS weight estimates Z / 2^n without bias.
Outcome jarzynski() {
  Rng rng(6061);
  bool ok = true;
  std::string detail;
  for (int rep = 0; rep < 3; ++rep) {
    const auto model = generate_random_graph_model(3, 1.0, {-1.0, 1.0}, rng);
    const double beta = 0.5 + 0.75 * rep;
    const double target = std::exp(exact_solve(model, beta).log_partition) / 8.0;
    const auto ws = run_ais(model, beta, AnnealingSchedule::linear(5), Kernel::gibbs, 10000, 6062 + rep);
    std::vector<double> w;
    for (double lw : ws.log_weights) w.push_back(std::exp(lw));
    const double m = mean(w);
    double ss = 0.0;
    for (double v : w) ss += (v - m) * (v - m);
    const double se = std::sqrt(ss / (w.size() - 1.0)) / std::sqrt(static_cast<double>(w.size()));
    const double z = std::abs(m - target) / se;
    ok = ok && z <= 4.0;
    detail += fmt("beta=%.2f: Z/8 %.5g, mean w %.5g, %.2f se; ", beta, target, m, z);
  }
  return {ok, detail};
}

// 9. Hopfield family: PT+SMCI beats SMCI, AIS+SMCI at least as good as PT+SMCI.
Outcome pt_comparison() {
  ExperimentSpec spec;
  spec.family = Family::hopfield;
  spec.n = 20;
  spec.alpha = 0.2;
  spec.betas = {2.0};
  spec.sample_counts = {1000};
  spec.anneal_steps = {1000};
  spec.methods = {Method::smci, Method::pt_smci, Method::ais_smci};
  spec.trials = 50;
  spec.seed = 7071;
  const auto res = run_sweep(spec, default_worker_count());
  const auto& smci = res.row(2.0, 1000, 1000, Method::smci);
  const auto& pt = res.row(2.0, 1000, 1000, Method::pt_smci);
  const auto& proposed = res.row(2.0, 1000, 1000, Method::ais_smci);
  const bool ok = pt.mae_mean < smci.mae_mean && proposed.mae_mean <= pt.mae_mean;
  return {ok, fmt("smci %.4g, pt+smci %.4g, ais+smci %.4g; paired wins pt<smci %zu/50, ais+smci<pt %zu/50",
                  smci.mae_mean, pt.mae_mean, proposed.mae_mean, wins(pt.trial_mae, smci.trial_mae),
                  wins(proposed.trial_mae, pt.trial_mae))};
}

// 10. Bipartite family with blocked Gibbs: criterion 4 ordering.
Outcome bipartite_ordering() {
  ExperimentSpec spec;
  spec.family = Family::bipartite;
  spec.n0 = 6;
  spec.n1 = 30;
  spec.p = 1.0;
  spec.kernel = Kernel::blocked;
  spec.betas = {2.0};
  spec.sample_counts = {1000};
  spec.anneal_steps = {1000};
  spec.trials = 50;
  spec.seed = 8081;
  const auto res = run_sweep(spec, default_worker_count());
  return low_temperature_checks(res, 2.0, 1000, 1000, "bipartite");
}

// 11. Expectations are a small share of AIS cost; SMCI expectations cost more.
Outcome timing_structure() {
  ExperimentSpec spec;
  spec.n = 50;
  spec.p = 1.0;
  spec.betas = {1.0};
  spec.sample_counts = {1000};
  spec.anneal_steps = {1000};
  spec.seed = 9091;
  const auto table = time_phases(spec, 3);
  const auto& ais = table.rows[0];
  const auto& proposed = table.rows[1];
  const bool ok = ais.expectation_fraction() < 0.05 && proposed.expectation_fraction() < 0.05 &&
                  proposed.expectations_ms > ais.expectations_ms;
  return {ok, fmt("sampling %.0f ms, weights %.0f ms, expectations ais %.2f ms (%.3f%%), proposed %.2f ms (%.3f%%)",
                  ais.sampling_ms, ais.weights_ms, ais.expectations_ms, 100.0 * ais.expectation_fraction(),
                  proposed.expectations_ms, 100.0 * proposed.expectation_fraction())};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 12. Repeated CLI runs with a fixed seed give byte-identical CSV.
Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("smci_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = SMCI_CLI_PATH;
  struct Case {
    std::string name;
    std::string args;
  };
  const std::vector<Case> cases{
      {"sweep-beta", "sweep-beta --n 10 --p 0.3 --beta 0.5 2 --N 100 --K 50 --trials 4 --seed 11"},
      {"sweep-n", "sweep-n --n 8 --N 50 100 --K 20 --trials 3 --seed 12"},
      {"sweep-k", "sweep-k --n 8 --N 50 --K 10 20 --trials 3 --seed 13"},
      {"compare-pt", "compare-pt --n 8 --beta 1 --N 40 --K 20 --pt-sweeps 5 --replicas 4 --trials 3 --seed 14"},
      {"bipartite", "sweep-beta --family bipartite --n0 3 --n1 8 --p 0.5 --beta 1 --N 40 --K 20 --trials 2 --seed 15"},
      {"exact", "exact --n 8 --p 0.5 --beta 0.5 1 2 --seed 16"},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    std::vector<std::string> outputs;
    for (const char* workers : {"1", "1", "2"}) {
      const fs::path csv = dir / (c.name + "_" + std::to_string(outputs.size()) + ".csv");
      const std::string cmd = "SMCI_WORKERS=" + std::string(workers) + " \"" + cli + "\" " + c.args +
                              " --csv \"" + csv.string() + "\" > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      outputs.push_back(rc == 0 ? slurp(csv) : std::string());
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
    ok = ok && same;
    detail += c.name + (same ? " identical; " : " DIFFERS; ");
  }
  {
    std::vector<std::string> outputs;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path samples = dir / ("samples_" + std::to_string(rep) + ".csv");
      const fs::path report = dir / ("report_" + std::to_string(rep) + ".csv");
      const std::string cmd = "\"" + cli + "\" sample --sampler ais --n 8 --beta 1 --N 30 --K 20 --seed 17 --samples \"" +
                              samples.string() + "\" --report \"" + report.string() + "\" > /dev/null 2>&1";
      const int rc = std::system(cmd.c_str());
      outputs.push_back(rc == 0 ? slurp(samples) + slurp(report) : std::string());
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
    ok = ok && same;
    detail += std::string("sample ") + (same ? "identical" : "DIFFERS");
  }
  fs::remove_all(dir);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", oracle_equivalence},
      {2, "kernel stationarity", kernel_stationarity},
      {3, "high-temperature ordering", high_temperature_ordering},
      {4, "low-temperature ordering", low_temperature_ordering},
      {5, "N scaling", n_scaling},
      {6, "K saturation", k_saturation},
      {7, "free energy", free_energy},
      {8, "Jarzynski unbiasedness", jarzynski},
      {9, "parallel tempering comparison", pt_comparison},
      {10, "bipartite ordering", bipartite_ordering},
      {11, "timing structure", timing_structure},
      {12, "CLI determinism", determinism},
  };
  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) selected.push_back(std::atoi(argv[a]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) ++failures;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << out.detail
              << " [" << fmt("%.1f", secs) << "s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
