#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "smci/ais.hpp"
#include "smci/estimators.hpp"
#include "smci/ising.hpp"
#include "smci/samplers.hpp"

namespace smci::io {

/// Decimal text that parses back to the same double (17 significant digits).
std::string format_double(double v);

/// Shortest decimal text that parses back to the same double.
std::string format_shortest(double v);

/// {"n": .., "biases": [..], "edges": [[i, j, J], ..], "layers": [n0, n1]}
std::string model_to_json(const IsingModel& model);
IsingModel model_from_json(const std::string& text);
void write_model(const IsingModel& model, const std::filesystem::path& path);
IsingModel read_model(const std::filesystem::path& path);

/// Header `s0,s1,...`, one row of +-1 per sample. Weighted sets add a
/// trailing `log_weight` column.
void write_samples_csv(std::ostream& out, const SampleSet& samples);
void write_samples_csv(std::ostream& out, const WeightedSampleSet& ws);
SampleSet read_samples_csv(std::istream& in);

nlohmann::json meta_to_json(const SampleSetMeta& meta, std::size_t count);

/// Per-vertex rows `kind,i,j,value...`; see the implementation for columns.
void write_report_csv(std::ostream& out, const IsingModel& model, const MomentReport& report);
nlohmann::json report_to_json(const IsingModel& model, const MomentReport& report);
nlohmann::json exact_to_json(const IsingModel& model, const ExactSolution& exact);
/// Report rows prefixed by a beta column, one block per solution.
void write_exact_csv(std::ostream& out, const IsingModel& model,
                     const std::vector<ExactSolution>& solutions);

/// Opens `path` for writing or throws std::runtime_error.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace smci::io
