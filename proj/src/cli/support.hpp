#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "brace/cli.hpp"
#include "brace/io.hpp"
#include "brace/simulation.hpp"

namespace brace::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Assign cfg[key] to target unless the flag was given on the command line.
template <class T>
void from_config(const json& cfg, const CLI::App& cmd, const std::string& flag,
                 const std::string& key, T& target) {
  if (cmd.count(flag) > 0 || !cfg.contains(key)) return;
  try {
    target = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError("config key '" + key + "': " + e.what());
  }
}

json load_config(const std::string& path);
std::uint64_t require_seed(const std::optional<std::uint64_t>& seed);

/// --threads when positive, else BRACE_THREADS, else the OpenMP default.
int resolve_threads(int flag_value);

class Stopwatch {
 public:
  double lap();

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json make_manifest(const std::string& command, const json& config, std::uint64_t seed);
void write_manifest(const fs::path& dir, const json& manifest, const std::string& name = "manifest.json");

/// train.csv, test.csv (sample_id, y, features) and truth.json.
void write_simulation(const fs::path& dir, const SimulatedData& data, const SimConfig& cfg);

void add_simulate(CLI::App& app, std::function<int()>& action);
void add_fit(CLI::App& app, std::function<int()>& action);
void add_summarize(CLI::App& app, std::function<int()>& action);
void add_evaluate(CLI::App& app, std::function<int()>& action);
void add_benchmark(CLI::App& app, std::function<int()>& action);

}  // namespace brace::cli
