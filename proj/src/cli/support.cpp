#include "support.hpp"

#include <cstdlib>

#include <omp.h>

namespace brace::cli {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  json cfg = io::read_json(path);
  if (!cfg.is_object()) throw UsageError(path + ": config must be a JSON object");
  return cfg;
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed) {
  if (!seed) throw UsageError("--seed is required (flag or config key \"seed\")");
  return *seed;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("BRACE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return omp_get_max_threads();
}

double Stopwatch::lap() {
  const auto now = std::chrono::steady_clock::now();
  const double s = std::chrono::duration<double>(now - last_).count();
  last_ = now;
  return s;
}

json make_manifest(const std::string& command, const json& config, std::uint64_t seed) {
  return json{{"command", command},
              {"config", config},
              {"seed", seed},
              {"version", kVersion},
              {"timings_seconds", json::object()}};
}

void write_manifest(const fs::path& dir, const json& manifest, const std::string& name) {
  fs::create_directories(dir);
  io::write_json(dir / name, manifest);
}

void write_simulation(const fs::path& dir, const SimulatedData& data, const SimConfig& cfg) {
  auto write_split = [&](const fs::path& path, const std::vector<Index>& rows) {
    io::SampleTable t;
    t.columns.push_back("y");
    t.columns.insert(t.columns.end(), data.feature_names.begin(), data.feature_names.end());
    t.values.resize(static_cast<Index>(rows.size()), data.composition.cols() + 1);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto i = static_cast<Index>(r);
      t.sample_ids.push_back(data.sample_ids[rows[r]]);
      t.values(i, 0) = data.response[rows[r]];
      t.values.row(i).tail(data.composition.cols()) = data.composition.row(rows[r]);
    }
    io::write_sample_table(path, t);
  };
  write_split(dir / "train.csv", data.train_rows);
  write_split(dir / "test.csv", data.test_rows);
  io::write_json(dir / "truth.json", io::to_json(data.truth, cfg));
}

}  // namespace brace::cli
