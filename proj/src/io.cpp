#include "smci/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "smci/rng.hpp"

namespace smci::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_shortest(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string model_to_json(const IsingModel& model) {
  std::ostringstream out;
  out << "{\n  \"n\": " << model.n() << ",\n  \"biases\": [";
  const auto& h = model.biases();
  for (std::size_t i = 0; i < h.size(); ++i) out << (i ? ", " : "") << format_double(h[i]);
  out << "],\n  \"edges\": [";
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out << (e ? ",\n    " : "\n    ") << '[' << edges[e].i << ", " << edges[e].j << ", "
        << format_double(edges[e].coupling) << ']';
  }
  out << (edges.empty() ? "]" : "\n  ]");
  if (model.layers()) out << ",\n  \"layers\": [" << model.layers()->n0 << ", " << model.layers()->n1 << ']';
  out << "\n}\n";
  return out.str();
}

IsingModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    const auto n = doc.at("n").get<std::size_t>();
    auto biases = doc.at("biases").get<std::vector<double>>();
    if (biases.size() != n) throw std::invalid_argument("model file: biases length differs from n");
    std::vector<Edge> edges;
    for (const auto& triple : doc.at("edges")) {
      if (!triple.is_array() || triple.size() != 3)
        throw std::invalid_argument("model file: edges must be [i, j, J] triples");
      edges.push_back({triple[0].get<std::size_t>(), triple[1].get<std::size_t>(), triple[2].get<double>()});
    }
    std::optional<Layers> layers;
    if (doc.contains("layers")) {
      const auto& l = doc.at("layers");
      if (!l.is_array() || l.size() != 2) throw std::invalid_argument("model file: layers must be [n0, n1]");
      layers = Layers{l[0].get<std::size_t>(), l[1].get<std::size_t>()};
    }
    return IsingModel(std::move(biases), std::move(edges), layers);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model file: ") + e.what());
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void write_model(const IsingModel& model, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << model_to_json(model);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

IsingModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

namespace {

void write_header(std::ostream& out, std::size_t n, bool weighted) {
  for (std::size_t i = 0; i < n; ++i) out << (i ? ",s" : "s") << i;
  if (weighted) out << ",log_weight";
  out << '\n';
}

void write_row(std::ostream& out, std::span<const Spin> row) {
  for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << static_cast<int>(row[i]);
}

}  // namespace

void write_samples_csv(std::ostream& out, const SampleSet& samples) {
  write_header(out, samples.n(), false);
  for (std::size_t mu = 0; mu < samples.size(); ++mu) {
    write_row(out, samples[mu]);
    out << '\n';
  }
}

void write_samples_csv(std::ostream& out, const WeightedSampleSet& ws) {
  write_header(out, ws.samples.n(), true);
  for (std::size_t mu = 0; mu < ws.samples.size(); ++mu) {
    write_row(out, ws.samples[mu]);
    out << ',' << format_double(ws.log_weights[mu]) << '\n';
  }
}

SampleSet read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("sample CSV is empty");
  std::size_t n = 0;
  {
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
      if (cell == "log_weight") break;
      if (cell != "s" + std::to_string(n)) throw std::invalid_argument("unexpected sample CSV header '" + cell + "'");
      ++n;
    }
  }
  std::vector<SpinConfig> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    SpinConfig x;
    while (x.size() < n && std::getline(row, cell, ',')) {
      if (cell == "1")
        x.push_back(1);
      else if (cell == "-1")
        x.push_back(-1);
      else
        throw std::invalid_argument("sample CSV entry must be 1 or -1, got '" + cell + "'");
    }
    if (x.size() != n) throw std::invalid_argument("short sample CSV row");
    rows.push_back(std::move(x));
  }
  if (rows.empty()) throw std::invalid_argument("sample CSV has no rows");
  SampleSet set(n, rows.size());
  for (std::size_t mu = 0; mu < rows.size(); ++mu) std::copy(rows[mu].begin(), rows[mu].end(), set[mu].begin());
  return set;
}

json meta_to_json(const SampleSetMeta& meta, std::size_t count) {
  return {{"sampler", meta.sampler},   {"kernel", meta.kernel},
          {"schedule", meta.schedule}, {"seed", meta.seed},
          {"model_hash", meta.model_hash}, {"K", meta.steps},
          {"N", count},                {"rng", std::string(Rng::name)}};
}

void write_report_csv(std::ostream& out, const IsingModel& model, const MomentReport& report) {
  out << "kind,i,j,magnetization,pair_moment,covariance\n";
  for (std::size_t i = 0; i < report.magnetization.size(); ++i)
    out << "vertex," << i << ",," << format_double(report.magnetization[i]) << ",,\n";
  const auto& edges = model.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    out << "edge," << edges[e].i << ',' << edges[e].j << ",," << format_double(report.pair_moment[e])
        << ',' << format_double(report.covariance[e]) << '\n';
  }
}

json report_to_json(const IsingModel& model, const MomentReport& report) {
  json j = {{"method", report.method},
            {"n_samples", report.n_samples},
            {"magnetization", report.magnetization},
            {"pair_moment", report.pair_moment},
            {"covariance", report.covariance},
            {"model_hash", model.hash()}};
  if (report.ess) j["ess"] = *report.ess;
  return j;
}

json exact_to_json(const IsingModel& model, const ExactSolution& exact) {
  json j = {{"beta", exact.beta},
            {"log_partition", exact.log_partition},
            {"magnetization", exact.magnetization},
            {"pair_moment", exact.pair_moment},
            {"covariance", exact.covariance},
            {"model_hash", model.hash()}};
  j["free_energy"] = std::isfinite(exact.free_energy) ? json(exact.free_energy) : json(nullptr);
  return j;
}

void write_exact_csv(std::ostream& out, const IsingModel& model,
                     const std::vector<ExactSolution>& solutions) {
  out << "beta,kind,i,j,magnetization,pair_moment,covariance\n";
  const auto& edges = model.edges();
  for (const auto& sol : solutions) {
    const std::string beta = format_shortest(sol.beta);
    for (std::size_t i = 0; i < sol.magnetization.size(); ++i)
      out << beta << ",vertex," << i << ",," << format_double(sol.magnetization[i]) << ",,\n";
    for (std::size_t e = 0; e < edges.size(); ++e) {
      out << beta << ",edge," << edges[e].i << ',' << edges[e].j << ",,"
          << format_double(sol.pair_moment[e]) << ',' << format_double(sol.covariance[e]) << '\n';
    }
  }
}

}  // namespace smci::io
