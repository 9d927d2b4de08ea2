#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "brace/common.hpp"
#include "brace/gibbs_sampler.hpp"
#include "brace/metrics.hpp"
#include "brace/posterior_summary.hpp"
#include "brace/simulation.hpp"

namespace brace::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);
double parse_double(const std::string& text, const std::string& context);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC-4180 style: comma separated, optional double quotes, "" escapes.
CsvTable read_csv(const fs::path& path);
void write_csv(const fs::path& path, const CsvTable& table);

/// Sample-by-column numeric table whose first column holds sample ids.
struct SampleTable {
  std::vector<std::string> sample_ids;
  std::vector<std::string> columns;
  Matrix values;
};

SampleTable read_sample_table(const fs::path& path);
void write_sample_table(const fs::path& path, const SampleTable& table);

/// Response file aligned to `sample_ids` by id. The response column is the
/// one named `column`, or the only non-id column when `column` is empty.
Vector read_response(const fs::path& path, const std::vector<std::string>& sample_ids,
                     const std::string& column = {});

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& value);

/// beta.csv, z.csv and scalars.csv inside `dir`.
void write_trace(const fs::path& dir, const ChainTrace& trace);
ChainTrace read_trace(const fs::path& dir);

json to_json(const Hyperparams& hp);
Hyperparams hyperparams_from_json(const json& j, Hyperparams base);
json to_json(const ChainConfig& cfg);
json to_json(const SimConfig& cfg);
json to_json(const SimulationTruth& truth, const SimConfig& cfg);
json to_json(const PosteriorSummary& summary, const std::vector<std::string>& names);
json to_json(const EvalReport& report);

/// Per-feature table: name, beta_mean, ci_lower, ci_upper, inclusion_prob,
/// cluster_label, selected; rows sorted by |beta_mean| descending.
void write_summary_table(const fs::path& path, const PosteriorSummary& summary,
                         const std::vector<std::string>& names);

}  // namespace brace::io
