#include "smci/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "smci/ais.hpp"
#include "smci/estimators.hpp"
#include "smci/io.hpp"

namespace smci {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename T>
bool contains(const std::vector<T>& v, T x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

struct GridPoint {
  double beta;
  std::size_t sample_count;
  std::size_t anneal_steps;
};

std::vector<GridPoint> grid_of(const ExperimentSpec& spec) {
  std::vector<GridPoint> grid;
  for (double b : spec.betas)
    for (std::size_t n : spec.sample_counts)
      for (std::size_t k : spec.anneal_steps) grid.push_back({b, n, k});
  return grid;
}

// MAE and timing of every (grid point, method) for one trial.
struct TrialRecord {
  std::vector<double> mae;          // [g * methods + m]
  std::vector<PhaseTimes> timing;   // same indexing
};

TrialRecord run_trial(const ExperimentSpec& spec, const std::vector<GridPoint>& grid,
                      std::size_t trial) {
  const std::uint64_t trial_seed = split_seed(spec.seed, trial);
  const IsingModel model = make_model(spec, split_seed(trial_seed, 0));
  const auto& methods = spec.methods;
  const std::size_t m_count = methods.size();
  TrialRecord rec{std::vector<double>(grid.size() * m_count, 0.0),
                  std::vector<PhaseTimes>(grid.size() * m_count)};

  const bool need_plain = contains(methods, Method::mci) || contains(methods, Method::smci);
  const bool need_ais = contains(methods, Method::ais) || contains(methods, Method::ais_smci);
  const bool need_pt = contains(methods, Method::pt_smci);

  std::vector<std::pair<double, ExactSolution>> exact_cache;
  auto exact_for = [&](double beta) -> const ExactSolution& {
    for (const auto& [b, sol] : exact_cache)
      if (b == beta) return sol;
    exact_cache.emplace_back(beta, solve_exact(spec, model, beta));
    return exact_cache.back().second;
  };

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& pt = grid[g];
    const ExactSolution& exact = exact_for(pt.beta);
    const auto schedule = AnnealingSchedule::linear(pt.anneal_steps);

    std::optional<SampleSet> plain;
    double plain_ms = 0.0;
    if (need_plain) {
      const auto t0 = Clock::now();
      plain.emplace(annealed_sample_set(model, pt.beta, schedule, spec.kernel, pt.sample_count,
                                        split_seed(trial_seed, 3 * g + 1)));
      plain_ms = ms_since(t0);
    }
    std::optional<WeightedSampleSet> weighted;
    AisPhaseTimes ais_times;
    if (need_ais) {
      weighted.emplace(run_ais(model, pt.beta, schedule, spec.kernel, pt.sample_count,
                               split_seed(trial_seed, 3 * g + 2), &ais_times));
    }
    std::optional<SampleSet> tempered;
    double pt_ms = 0.0;
    if (need_pt) {
      PtConfig cfg = spec.pt;
      cfg.total_samples = pt.sample_count;
      cfg.kernel = spec.kernel;
      const auto t0 = Clock::now();
      tempered.emplace(
          parallel_tempering_sample_set(model, pt.beta, cfg, split_seed(trial_seed, 3 * g + 3)));
      pt_ms = ms_since(t0);
    }

    for (std::size_t m = 0; m < m_count; ++m) {
      PhaseTimes& t = rec.timing[g * m_count + m];
      double& out = rec.mae[g * m_count + m];
      const auto t0 = Clock::now();
      switch (methods[m]) {
        case Method::exact:
          out = 0.0;
          break;
        case Method::mci:
          out = mae(exact, mci_moments(model, *plain)).mae;
          t.sampling_ms = plain_ms;
          break;
        case Method::smci:
          out = mae(exact, smci1_moments(model, pt.beta, *plain)).mae;
          t.sampling_ms = plain_ms;
          break;
        case Method::ais:
          out = mae(exact, weighted_moments(model, pt.beta, *weighted, WeightedMode::mci)).mae;
          t.sampling_ms = std::chrono::duration<double, std::milli>(ais_times.sampling).count();
          t.weights_ms = std::chrono::duration<double, std::milli>(ais_times.weights).count();
          break;
        case Method::ais_smci:
          out = mae(exact, weighted_moments(model, pt.beta, *weighted, WeightedMode::smci1)).mae;
          t.sampling_ms = std::chrono::duration<double, std::milli>(ais_times.sampling).count();
          t.weights_ms = std::chrono::duration<double, std::milli>(ais_times.weights).count();
          break;
        case Method::pt_smci:
          out = mae(exact, smci1_moments(model, pt.beta, *tempered)).mae;
          t.sampling_ms = pt_ms;
          break;
      }
      t.expectations_ms = ms_since(t0);
    }
  }
  return rec;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::random: return "random";
    case Family::hopfield: return "hopfield";
    case Family::bipartite: return "bipartite";
  }
  return "random";
}

Family family_from_string(std::string_view s) {
  if (s == "random") return Family::random;
  if (s == "hopfield") return Family::hopfield;
  if (s == "bipartite") return Family::bipartite;
  throw std::invalid_argument("unknown model family '" + std::string(s) + "'");
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::exact: return "exact";
    case Method::mci: return "mci";
    case Method::smci: return "smci";
    case Method::ais: return "ais";
    case Method::ais_smci: return "ais+smci";
    case Method::pt_smci: return "pt+smci";
  }
  return "exact";
}

Method method_from_string(std::string_view s) {
  for (Method m : {Method::exact, Method::mci, Method::smci, Method::ais, Method::ais_smci,
                   Method::pt_smci}) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown method tag '" + std::string(s) + "'");
}

void ExperimentSpec::validate(bool exact_oracle) const {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  if (betas.empty() || sample_counts.empty() || anneal_steps.empty())
    throw std::invalid_argument("beta, N and K grids must be non-empty");
  for (double b : betas) {
    if (!std::isfinite(b) || b < 0.0) throw std::invalid_argument("beta grid entries must be finite and >= 0");
  }
  for (std::size_t v : sample_counts) {
    if (v == 0) throw std::invalid_argument("N grid entries must be >= 1");
  }
  for (std::size_t v : anneal_steps) {
    if (v == 0) throw std::invalid_argument("K grid entries must be >= 1");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (!std::isfinite(range.lo) || !std::isfinite(range.hi) || range.lo > range.hi)
    throw std::invalid_argument("parameter range must be finite with lo <= hi");
  switch (family) {
    case Family::random:
    case Family::hopfield:
      if (n == 0) throw std::invalid_argument("n must be >= 1");
      if (exact_oracle && n > kExactMaxVertices)
        throw std::length_error("exact oracle guard: n = " + std::to_string(n) + " exceeds " +
                                std::to_string(kExactMaxVertices));
      if (family == Family::hopfield && !(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
      break;
    case Family::bipartite:
      if (n0 == 0 || n1 == 0) throw std::invalid_argument("bipartite layers must be non-empty");
      if (exact_oracle && n0 > kExactMaxVertices)
        throw std::length_error("exact oracle guard: |V0| = " + std::to_string(n0) + " exceeds " +
                                std::to_string(kExactMaxVertices));
      break;
  }
  if (kernel == Kernel::blocked && family != Family::bipartite)
    throw std::invalid_argument("blocked Gibbs is only available for the bipartite family");
  if (pt.num_replicas == 0 || pt.sweeps_between_swaps == 0)
    throw std::invalid_argument("PT counts must be >= 1");
  if (!(pt.beta_low_ratio > 0.0 && pt.beta_low_ratio < 1.0))
    throw std::invalid_argument("PT ladder ratio must lie in (0, 1)");
}

double ExperimentSpec::family_param() const noexcept {
  return family == Family::hopfield ? alpha : p;
}

std::size_t ExperimentSpec::vertex_count() const noexcept {
  return family == Family::bipartite ? n0 + n1 : n;
}

void to_json(json& j, const ExperimentSpec& s) {
  std::vector<std::string> methods;
  for (Method m : s.methods) methods.emplace_back(to_string(m));
  j = json{{"family", to_string(s.family)},
           {"n", s.n},
           {"p", s.p},
           {"alpha", s.alpha},
           {"n0", s.n0},
           {"n1", s.n1},
           {"param_range", {s.range.lo, s.range.hi}},
           {"betas", s.betas},
           {"N", s.sample_counts},
           {"K", s.anneal_steps},
           {"methods", methods},
           {"trials", s.trials},
           {"seed", s.seed},
           {"kernel", to_string(s.kernel)},
           {"pt",
            {{"replicas", s.pt.num_replicas},
             {"beta_low_ratio", s.pt.beta_low_ratio},
             {"sweeps_between_swaps", s.pt.sweeps_between_swaps}}},
           {"output", s.output}};
}

void from_json(const json& j, ExperimentSpec& s) {
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  try {
    if (j.contains("family")) s.family = family_from_string(j.at("family").get<std::string>());
    if (j.contains("n")) s.n = j.at("n").get<std::size_t>();
    if (j.contains("p")) s.p = j.at("p").get<double>();
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
    if (j.contains("n0")) s.n0 = j.at("n0").get<std::size_t>();
    if (j.contains("n1")) s.n1 = j.at("n1").get<std::size_t>();
    if (j.contains("param_range")) {
      const auto r = j.at("param_range").get<std::vector<double>>();
      if (r.size() != 2) throw std::invalid_argument("param_range must be [lo, hi]");
      s.range = {r[0], r[1]};
    }
    if (j.contains("betas")) s.betas = j.at("betas").get<std::vector<double>>();
    if (j.contains("N")) s.sample_counts = j.at("N").get<std::vector<std::size_t>>();
    if (j.contains("K")) s.anneal_steps = j.at("K").get<std::vector<std::size_t>>();
    if (j.contains("methods")) {
      s.methods.clear();
      for (const auto& m : j.at("methods")) s.methods.push_back(method_from_string(m.get<std::string>()));
    }
    if (j.contains("trials")) s.trials = j.at("trials").get<std::size_t>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("kernel")) s.kernel = kernel_from_string(j.at("kernel").get<std::string>());
    if (j.contains("pt")) {
      const auto& pt = j.at("pt");
      if (pt.contains("replicas")) s.pt.num_replicas = pt.at("replicas").get<std::size_t>();
      if (pt.contains("beta_low_ratio")) s.pt.beta_low_ratio = pt.at("beta_low_ratio").get<double>();
      if (pt.contains("sweeps_between_swaps"))
        s.pt.sweeps_between_swaps = pt.at("sweeps_between_swaps").get<std::size_t>();
    }
    if (j.contains("output")) s.output = j.at("output").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
}

IsingModel make_model(const ExperimentSpec& spec, std::uint64_t model_seed) {
  Rng rng(model_seed);
  switch (spec.family) {
    case Family::random:
      return generate_random_graph_model(spec.n, spec.p, spec.range, rng);
    case Family::hopfield: {
      const auto m = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(spec.alpha * static_cast<double>(spec.n))));
      return generate_hopfield_model(spec.n, m, rng).model;
    }
    case Family::bipartite:
      return generate_bipartite_model(spec.n0, spec.n1, spec.p, spec.range, rng);
  }
  throw std::logic_error("unreachable family");
}

ExactSolution solve_exact(const ExperimentSpec& spec, const IsingModel& model, double beta) {
  return spec.family == Family::bipartite ? exact_solve_bipartite(model, beta)
                                          : exact_solve(model, beta);
}

const SweepRow& SweepResult::row(double beta, std::size_t n_samples, std::size_t steps,
                                 Method m) const {
  for (const auto& r : rows) {
    if (r.beta == beta && r.sample_count == n_samples && r.anneal_steps == steps && r.method == m)
      return r;
  }
  throw std::out_of_range("no sweep row for the requested grid point and method");
}

std::size_t default_worker_count() {
  if (const char* env = std::getenv("SMCI_WORKERS"); env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

SweepResult run_sweep(const ExperimentSpec& spec, std::size_t workers) {
  spec.validate();
  const auto grid = grid_of(spec);
  std::vector<TrialRecord> records(spec.trials);

  if (workers == 0) workers = default_worker_count();
  workers = std::min(workers, spec.trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < spec.trials; t = next++) {
      try {
        records[t] = run_trial(spec, grid, t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = spec.trials;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result{spec, std::string(Rng::name), std::string(kVersion), {}};
  const std::size_t m_count = spec.methods.size();
  const double trials = static_cast<double>(spec.trials);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t m = 0; m < m_count; ++m) {
      SweepRow row;
      row.beta = grid[g].beta;
      row.sample_count = grid[g].sample_count;
      row.anneal_steps = grid[g].anneal_steps;
      row.method = spec.methods[m];
      row.trials = spec.trials;
      row.trial_mae.reserve(spec.trials);
      double sum = 0.0;
      for (const auto& rec : records) {
        const double v = rec.mae[g * m_count + m];
        row.trial_mae.push_back(v);
        sum += v;
        const auto& t = rec.timing[g * m_count + m];
        row.timing.sampling_ms += t.sampling_ms / trials;
        row.timing.weights_ms += t.weights_ms / trials;
        row.timing.expectations_ms += t.expectations_ms / trials;
      }
      row.mae_mean = sum / trials;
      if (spec.trials > 1) {
        double ss = 0.0;
        for (double v : row.trial_mae) ss += (v - row.mae_mean) * (v - row.mae_mean);
        row.mae_stderr = std::sqrt(ss / (trials - 1.0)) / std::sqrt(trials);
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

double PhaseRow::expectation_fraction() const noexcept {
  const double total = sampling_ms + weights_ms + expectations_ms;
  return total > 0.0 ? expectations_ms / total : 0.0;
}

PhaseTable time_phases(const ExperimentSpec& spec, std::size_t repeats) {
  spec.validate(false);
  if (repeats == 0) throw std::invalid_argument("repeats must be >= 1");
  const double beta = spec.betas.front();
  const std::size_t count = spec.sample_counts.front();
  const auto schedule = AnnealingSchedule::linear(spec.anneal_steps.front());
  const IsingModel model = make_model(spec, split_seed(spec.seed, 0));

  std::vector<double> sampling, weights, ais_exp, proposed_exp;
  for (std::size_t r = 0; r < repeats; ++r) {
    AisPhaseTimes times;
    const auto ws =
        run_ais(model, beta, schedule, spec.kernel, count, split_seed(spec.seed, r + 1), &times);
    sampling.push_back(std::chrono::duration<double, std::milli>(times.sampling).count());
    weights.push_back(std::chrono::duration<double, std::milli>(times.weights).count());

    auto t0 = Clock::now();
    [[maybe_unused]] auto plain = weighted_moments(model, beta, ws, WeightedMode::mci);
    ais_exp.push_back(ms_since(t0));
    t0 = Clock::now();
    [[maybe_unused]] auto proposed = weighted_moments(model, beta, ws, WeightedMode::smci1);
    proposed_exp.push_back(ms_since(t0));
  }

  PhaseTable table{model.n(), model.num_edges(), count, schedule.steps(), repeats, {}};
  const double s_ms = median(sampling);
  const double w_ms = median(weights);
  for (auto [name, exp_ms] : {std::pair{"ais", median(ais_exp)},
                              std::pair{"proposed", median(proposed_exp)}}) {
    table.rows.push_back({name, s_ms, w_ms, exp_ms, (s_ms + w_ms + exp_ms) / 1000.0});
  }
  return table;
}

void emit_csv(std::ostream& out, const SweepResult& result) {
  out << "family,param,beta,method,N,K,trials,mae_mean,mae_stderr\n";
  const auto family = to_string(result.spec.family);
  const auto param = io::format_shortest(result.spec.family_param());
  for (const auto& r : result.rows) {
    out << family << ',' << param << ',' << io::format_shortest(r.beta) << ',' << to_string(r.method)
        << ',' << r.sample_count << ',' << r.anneal_steps << ',' << r.trials << ','
        << io::format_shortest(r.mae_mean) << ',' << io::format_shortest(r.mae_stderr) << '\n';
  }
}

json sweep_to_json(const SweepResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"beta", r.beta},
                    {"N", r.sample_count},
                    {"K", r.anneal_steps},
                    {"method", to_string(r.method)},
                    {"trials", r.trials},
                    {"mae_mean", r.mae_mean},
                    {"mae_stderr", r.mae_stderr},
                    {"trial_mae", r.trial_mae},
                    {"timing_ms",
                     {{"sampling", r.timing.sampling_ms},
                      {"weights", r.timing.weights_ms},
                      {"expectations", r.timing.expectations_ms}}}});
  }
  return {{"metadata", {{"seed", result.spec.seed}, {"rng", result.rng}, {"version", result.version}}},
          {"spec", result.spec},
          {"rows", rows}};
}

SweepResult sweep_from_json(const json& j) {
  SweepResult result;
  try {
    result.spec = j.at("spec").get<ExperimentSpec>();
    result.rng = j.at("metadata").at("rng").get<std::string>();
    result.version = j.at("metadata").at("version").get<std::string>();
    for (const auto& r : j.at("rows")) {
      SweepRow row;
      row.beta = r.at("beta").get<double>();
      row.sample_count = r.at("N").get<std::size_t>();
      row.anneal_steps = r.at("K").get<std::size_t>();
      row.method = method_from_string(r.at("method").get<std::string>());
      row.trials = r.at("trials").get<std::size_t>();
      row.mae_mean = r.at("mae_mean").get<double>();
      row.mae_stderr = r.at("mae_stderr").get<double>();
      row.trial_mae = r.at("trial_mae").get<std::vector<double>>();
      const auto& t = r.at("timing_ms");
      row.timing = {t.at("sampling").get<double>(), t.at("weights").get<double>(),
                    t.at("expectations").get<double>()};
      result.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("sweep JSON: ") + e.what());
  }
  return result;
}

void emit_phase_csv(std::ostream& out, const PhaseTable& table) {
  out << "n,edges,N,K,method,sampling_ms,weights_ms,expectations_ms,total_s\n";
  for (const auto& r : table.rows) {
    out << table.n << ',' << table.edges << ',' << table.sample_count << ',' << table.anneal_steps
        << ',' << r.method << ',' << io::format_shortest(r.sampling_ms) << ','
        << io::format_shortest(r.weights_ms) << ',' << io::format_shortest(r.expectations_ms) << ','
        << io::format_shortest(r.total_s) << '\n';
  }
}

json phase_to_json(const PhaseTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"method", r.method},
                    {"sampling_ms", r.sampling_ms},
                    {"weights_ms", r.weights_ms},
                    {"expectations_ms", r.expectations_ms},
                    {"total_s", r.total_s},
                    {"expectation_fraction", r.expectation_fraction()}});
  }
  return {{"n", table.n},           {"edges", table.edges}, {"N", table.sample_count},
          {"K", table.anneal_steps}, {"repeats", table.repeats}, {"rng", std::string(Rng::name)},
          {"rows", rows}};
}

}  // namespace smci
