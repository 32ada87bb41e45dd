// Command-line front end: benchmark sweeps, exact oracle, phase timing, and
// model/sample file utilities.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smci/ais.hpp"
#include "smci/estimators.hpp"
#include "smci/harness.hpp"
#include "smci/io.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct SpecFlags {
  std::string config;
  std::string family;
  std::optional<std::size_t> n, n0, n1, trials, replicas, pt_sweeps;
  std::optional<double> p, alpha, pt_ratio;
  std::vector<double> betas;
  std::vector<std::size_t> sample_counts, anneal_steps;
  std::vector<std::string> methods;
  std::optional<std::uint64_t> seed;
  std::string kernel;
  std::size_t workers = 0;
  std::string csv;
  std::string json_out;
};

void add_spec_flags(CLI::App* cmd, SpecFlags& f, bool require_seed) {
  cmd->add_option("--config", f.config, "JSON experiment config (flags override it)");
  cmd->add_option("--family", f.family, "random | hopfield | bipartite");
  cmd->add_option("--n", f.n, "vertex count (random, hopfield)");
  cmd->add_option("--p", f.p, "edge probability (random, bipartite)");
  cmd->add_option("--alpha", f.alpha, "pattern ratio m/n (hopfield)");
  cmd->add_option("--n0", f.n0, "layer-0 size (bipartite)");
  cmd->add_option("--n1", f.n1, "layer-1 size (bipartite)");
  cmd->add_option("--beta", f.betas, "inverse temperature grid")->delimiter(',');
  cmd->add_option("--N", f.sample_counts, "sample-count grid")->delimiter(',');
  cmd->add_option("--K", f.anneal_steps, "annealing-step grid")->delimiter(',');
  cmd->add_option("--methods", f.methods, "exact,mci,smci,ais,ais+smci,pt+smci")->delimiter(',');
  cmd->add_option("--trials", f.trials, "independent trials per grid point");
  cmd->add_option("--kernel", f.kernel, "gibbs | blocked");
  cmd->add_option("--replicas", f.replicas, "parallel-tempering replica count");
  cmd->add_option("--pt-ratio", f.pt_ratio, "coldest/hottest PT ladder ratio");
  cmd->add_option("--pt-sweeps", f.pt_sweeps, "sweeps per replica between swap passes");
  cmd->add_option("--workers", f.workers, "worker threads (default: $SMCI_WORKERS or cores)");
  cmd->add_option("--csv", f.csv, "CSV output path");
  cmd->add_option("--json", f.json_out, "JSON output path");
  auto* seed = cmd->add_option("--seed", f.seed, "master seed");
  if (require_seed) seed->required();
}

smci::ExperimentSpec build_spec(const SpecFlags& f, smci::ExperimentSpec spec, bool exact_oracle = true) {
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw std::runtime_error("cannot open config '" + f.config + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    smci::from_json(doc, spec);
  }
  if (!f.family.empty()) {
    spec.family = smci::family_from_string(f.family);
    if (spec.family == smci::Family::bipartite && f.kernel.empty()) spec.kernel = smci::Kernel::blocked;
  }
  if (f.n) spec.n = *f.n;
  if (f.p) spec.p = *f.p;
  if (f.alpha) spec.alpha = *f.alpha;
  if (f.n0) spec.n0 = *f.n0;
  if (f.n1) spec.n1 = *f.n1;
  if (!f.betas.empty()) spec.betas = f.betas;
  if (!f.sample_counts.empty()) spec.sample_counts = f.sample_counts;
  if (!f.anneal_steps.empty()) spec.anneal_steps = f.anneal_steps;
  if (!f.methods.empty()) {
    spec.methods.clear();
    for (const auto& m : f.methods) spec.methods.push_back(smci::method_from_string(m));
  }
  if (f.trials) spec.trials = *f.trials;
  if (f.seed) spec.seed = *f.seed;
  if (!f.kernel.empty()) spec.kernel = smci::kernel_from_string(f.kernel);
  if (f.replicas) spec.pt.num_replicas = *f.replicas;
  if (f.pt_ratio) spec.pt.beta_low_ratio = *f.pt_ratio;
  if (f.pt_sweeps) spec.pt.sweeps_between_swaps = *f.pt_sweeps;
  if (!f.csv.empty()) spec.output = f.csv;
  spec.validate(exact_oracle);
  return spec;
}

// Writes to a sibling temporary file, then renames, so a failed run never
// leaves a truncated result behind.
void write_atomically(const std::string& path, const std::string& content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    auto out = smci::io::open_output(tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

void emit_sweep(const smci::SweepResult& result, const SpecFlags& f) {
  std::ostringstream csv;
  smci::emit_csv(csv, result);
  const std::string json_text = smci::sweep_to_json(result).dump(2) + "\n";
  if (!f.csv.empty()) write_atomically(f.csv, csv.str());
  if (!f.json_out.empty()) write_atomically(f.json_out, json_text);
  if (f.csv.empty()) std::cout << csv.str();
}

int run_sweep_command(const SpecFlags& f, smci::ExperimentSpec defaults) {
  const auto spec = build_spec(f, std::move(defaults));
  emit_sweep(smci::run_sweep(spec, f.workers), f);
  return 0;
}

std::vector<double> beta_grid() {
  std::vector<double> b;
  for (int k = 1; k <= 10; ++k) b.push_back(0.2 * k);
  return b;
}

smci::IsingModel load_or_generate(const std::string& model_path, const SpecFlags& f,
                                  const smci::ExperimentSpec& defaults, smci::ExperimentSpec& spec,
                                  bool exact_oracle) {
  spec = build_spec(f, defaults, exact_oracle);
  if (!model_path.empty()) return smci::io::read_model(model_path);
  if (!f.seed) throw std::invalid_argument("--seed is required when no --model is given");
  return smci::make_model(spec, smci::split_seed(spec.seed, 0));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo, SMCI and AIS estimators for Ising models"};
  app.require_subcommand(1);

  smci::ExperimentSpec beta_defaults;
  beta_defaults.betas = beta_grid();

  smci::ExperimentSpec n_defaults;
  n_defaults.betas = {2.0};
  n_defaults.sample_counts = {100, 316, 1000, 3162};

  smci::ExperimentSpec k_defaults;
  k_defaults.betas = {2.0};
  k_defaults.anneal_steps = {10, 50, 100, 500, 1000};

  smci::ExperimentSpec pt_defaults;
  pt_defaults.family = smci::Family::hopfield;
  pt_defaults.betas = beta_grid();
  pt_defaults.methods = {smci::Method::smci, smci::Method::pt_smci, smci::Method::ais_smci};

  smci::ExperimentSpec timing_defaults;
  timing_defaults.n = 50;
  timing_defaults.p = 1.0;
  timing_defaults.betas = {1.0};

  SpecFlags beta_flags, n_flags, k_flags, pt_flags, exact_flags, time_flags, gen_flags, sample_flags;

  auto* sweep_beta = app.add_subcommand("sweep-beta", "MAE versus inverse temperature");
  add_spec_flags(sweep_beta, beta_flags, true);
  auto* sweep_n = app.add_subcommand("sweep-n", "MAE versus sample count N");
  add_spec_flags(sweep_n, n_flags, true);
  auto* sweep_k = app.add_subcommand("sweep-k", "MAE versus annealing steps K");
  add_spec_flags(sweep_k, k_flags, true);
  auto* compare_pt = app.add_subcommand("compare-pt", "SMCI, PT+SMCI and AIS+SMCI versus beta");
  add_spec_flags(compare_pt, pt_flags, true);

  std::string exact_model;
  auto* exact = app.add_subcommand("exact", "exact moments and free energy by enumeration");
  add_spec_flags(exact, exact_flags, false);
  exact->add_option("--model", exact_model, "model JSON file (otherwise generated from --seed)");

  std::size_t repeats = 3;
  auto* timing = app.add_subcommand("time-phases", "wall-clock of sampling, weights and expectations");
  add_spec_flags(timing, time_flags, true);
  timing->add_option("--repeats", repeats, "repetitions per phase (median reported)");

  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "draw a model and write it as JSON");
  add_spec_flags(generate, gen_flags, true);
  generate->add_option("--out", gen_out, "model JSON path")->required();

  std::string sample_model, sampler = "ais", sample_out, meta_out, report_out, estimator = "smci";
  auto* sample = app.add_subcommand("sample", "draw a sample set and optionally estimate moments");
  add_spec_flags(sample, sample_flags, false);
  sample->add_option("--model", sample_model, "model JSON file (otherwise generated from --seed)");
  sample->add_option("--sampler", sampler, "annealed | ais | pt");
  sample->add_option("--samples", sample_out, "sample CSV path");
  sample->add_option("--meta", meta_out, "sidecar metadata JSON path");
  sample->add_option("--report", report_out, "moment report CSV path");
  sample->add_option("--estimator", estimator, "mci | smci (weighted for ais)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sweep_beta) return run_sweep_command(beta_flags, beta_defaults);
    if (*sweep_n) return run_sweep_command(n_flags, n_defaults);
    if (*sweep_k) return run_sweep_command(k_flags, k_defaults);
    if (*compare_pt) return run_sweep_command(pt_flags, pt_defaults);

    if (*exact) {
      smci::ExperimentSpec spec;
      const auto model = load_or_generate(exact_model, exact_flags, smci::ExperimentSpec{}, spec, true);
      json out = json::array();
      std::vector<smci::ExactSolution> solutions;
      for (double beta : spec.betas) {
        solutions.push_back(model.layers() ? smci::exact_solve_bipartite(model, beta)
                                           : smci::exact_solve(model, beta));
        out.push_back(smci::io::exact_to_json(model, solutions.back()));
      }
      const std::string text = out.dump(2) + "\n";
      if (!exact_flags.csv.empty()) {
        std::ostringstream csv;
        smci::io::write_exact_csv(csv, model, solutions);
        write_atomically(exact_flags.csv, csv.str());
      }
      if (!exact_flags.json_out.empty())
        write_atomically(exact_flags.json_out, text);
      else if (exact_flags.csv.empty())
        std::cout << text;
      return 0;
    }

    if (*timing) {
      const auto spec = build_spec(time_flags, timing_defaults, false);
      const auto table = smci::time_phases(spec, repeats);
      std::ostringstream csv;
      smci::emit_phase_csv(csv, table);
      if (!time_flags.json_out.empty())
        write_atomically(time_flags.json_out, smci::phase_to_json(table).dump(2) + "\n");
      if (!time_flags.csv.empty())
        write_atomically(time_flags.csv, csv.str());
      else
        std::cout << csv.str();
      return 0;
    }

    if (*generate) {
      const auto spec = build_spec(gen_flags, smci::ExperimentSpec{}, false);
      write_atomically(gen_out, smci::io::model_to_json(smci::make_model(spec, smci::split_seed(spec.seed, 0))));
      return 0;
    }

    if (*sample) {
      smci::ExperimentSpec spec;
      const auto model = load_or_generate(sample_model, sample_flags, smci::ExperimentSpec{}, spec, false);
      const double beta = spec.betas.front();
      const std::size_t count = spec.sample_counts.front();
      const auto schedule = smci::AnnealingSchedule::linear(spec.anneal_steps.front());
      const auto kernel = model.layers() && sample_flags.kernel.empty() ? smci::Kernel::blocked : spec.kernel;
      const std::uint64_t seed = smci::split_seed(spec.seed, 1);
      std::ostringstream samples_csv, report_csv;
      json meta;
      if (sampler == "ais") {
        const auto ws = smci::run_ais(model, beta, schedule, kernel, count, seed);
        smci::io::write_samples_csv(samples_csv, ws);
        const auto diag = smci::ais_normalizer(ws);
        meta = smci::io::meta_to_json(ws.samples.meta, count);
        meta["log_omega"] = diag.log_omega;
        meta["ess"] = diag.ess;
        meta["max_weight_share"] = diag.max_weight_share;
        if (beta > 0.0) meta["free_energy_estimate"] = smci::free_energy_estimate(ws, beta, model.n());
        const auto mode = estimator == "mci" ? smci::WeightedMode::mci : smci::WeightedMode::smci1;
        smci::io::write_report_csv(report_csv, model, smci::weighted_moments(model, beta, ws, mode));
      } else {
        std::optional<smci::SampleSet> set;
        if (sampler == "annealed") {
          set.emplace(smci::annealed_sample_set(model, beta, schedule, kernel, count, seed));
        } else if (sampler == "pt") {
          auto cfg = spec.pt;
          cfg.total_samples = count;
          cfg.kernel = kernel;
          set.emplace(smci::parallel_tempering_sample_set(model, beta, cfg, seed));
        } else {
          throw std::invalid_argument("unknown sampler '" + sampler + "'");
        }
        smci::io::write_samples_csv(samples_csv, *set);
        meta = smci::io::meta_to_json(set->meta, count);
        const auto report = estimator == "mci" ? smci::mci_moments(model, *set)
                                               : smci::smci1_moments(model, beta, *set);
        smci::io::write_report_csv(report_csv, model, report);
      }
      meta["beta"] = beta;
      if (!sample_out.empty()) write_atomically(sample_out, samples_csv.str());
      if (!meta_out.empty()) write_atomically(meta_out, meta.dump(2) + "\n");
      if (!report_out.empty())
        write_atomically(report_out, report_csv.str());
      else
        std::cout << report_csv.str();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
