#include <atomic>
#include <cmath>
#include <iostream>
#include <memory>
#include <mutex>
#include <thread>

#include <omp.h>

#include "brace/pipeline.hpp"
#include "support.hpp"

namespace brace::cli {
namespace {

struct BenchmarkArgs {
  std::string grid, out;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
};

struct Grid {
  std::vector<SimConfig> configs;
  int replicates = 5;
  std::uint64_t seed = 0;
  ChainConfig chain;
  SummaryOptions summary;
};

Grid parse_grid(const json& j, const BenchmarkArgs& a) {
  Grid g;
  try {
    if (!j.contains("configs") || !j.at("configs").is_array() || j.at("configs").empty()) {
      throw UsageError("grid needs a nonempty 'configs' array");
    }
    for (const json& c : j.at("configs")) {
      SimConfig s;
      s.n = c.value("n", s.n);
      s.p = c.value("p", s.p);
      s.cov_case = parse_covariance_case(c.value("case", std::string("dep1")));
      s.rho = c.value("rho", s.rho);
      s.snr = c.value("snr", s.snr);
      s.train_fraction = c.value("train_fraction", s.train_fraction);
      s.validate();
      g.configs.push_back(s);
    }
    g.replicates = a.replicates.value_or(j.value("replicates", g.replicates));
    if (a.seed) {
      g.seed = *a.seed;
    } else if (j.contains("seed")) {
      g.seed = j.at("seed").get<std::uint64_t>();
    } else {
      throw UsageError("--seed is required (flag or grid key \"seed\")");
    }
    const json chain = j.value("chain", json::object());
    g.chain.n_iter = chain.value("iters", g.chain.n_iter);
    g.chain.burn_in = chain.value("burnin", g.chain.burn_in);
    g.chain.thin = chain.value("thin", g.chain.thin);
    g.chain.init_clusters = chain.value("init_clusters", g.chain.init_clusters);
    g.chain.random_sweep = chain.value("random_sweep", g.chain.random_sweep);
    g.chain.strategy = parse_strategy(chain.value("strategy", std::string("auto")));
    g.chain.validate();
    const json summary = j.value("summary", json::object());
    g.summary.level = summary.value("level", g.summary.level);
    g.summary.loss = parse_loss(summary.value("loss", std::string("binder")));
    g.summary.restarts = summary.value("restarts", g.summary.restarts);
  } catch (const json::exception& e) {
    throw UsageError(std::string("grid: ") + e.what());
  }
  if (g.replicates < 1) throw UsageError("replicates must be positive");
  return g;
}

struct ReplicateRow {
  std::size_t config = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::string status;
  EvalReport report;
  double max_abs_sum = 0.0;
  double seconds = 0.0;
};

std::string mean_sd(const std::vector<double>& v) {
  if (v.empty()) return "NA";
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f (%.3f)", mean, sd);
  return buf;
}

int run_benchmark(const CLI::App& cmd, BenchmarkArgs& a) {
  (void)cmd;
  if (a.out.empty()) throw UsageError("--out is required");
  const Grid g = parse_grid(io::read_json(a.grid), a);
  const int jobs = resolve_threads(a.jobs);
  const fs::path out(a.out);

  json config{{"grid", a.grid}, {"replicates", g.replicates}, {"jobs", jobs},
              {"chain", io::to_json(g.chain)}};
  config["configs"] = json::array();
  for (const SimConfig& s : g.configs) config["configs"].push_back(io::to_json(s));
  json manifest = make_manifest("benchmark", config, g.seed);
  write_manifest(out, manifest);
  Stopwatch clock;

  std::vector<ReplicateRow> rows;
  for (std::size_t c = 0; c < g.configs.size(); ++c) {
    for (int r = 0; r < g.replicates; ++r) rows.push_back({c, r, g.seed, "", {}, 0.0, 0.0});
  }
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    omp_set_num_threads(1);
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      ReplicateRow& row = rows[k];
      const ReplicateSeeds seeds = ReplicateSeeds::derive(g.seed, row.config, row.replicate);
      SimConfig sim = g.configs[row.config];
      sim.seed = seeds.simulate;
      ChainConfig chain = g.chain;
      chain.seed = seeds.chain;
      SummaryOptions opt = g.summary;
      opt.seed = seeds.summary;
      const fs::path dir =
          out / ("config" + std::to_string(row.config)) / ("rep" + std::to_string(row.replicate));
      try {
        fs::create_directories(dir);
        json rep = make_manifest("benchmark-replicate",
                                 json{{"sim", io::to_json(sim)}, {"chain", io::to_json(chain)},
                                      {"summary_seed", opt.seed}},
                                 seeds.chain);
        write_manifest(dir, rep);
        const ReplicateResult res = run_replicate(sim, chain, opt);
        write_simulation(dir, res.data, sim);
        io::write_trace(dir, res.trace);
        io::write_json(dir / "summary.json", io::to_json(res.summary, res.trace.feature_names));
        io::write_json(dir / "eval.json", io::to_json(res.report));
        row.report = res.report;
        row.max_abs_sum = res.max_abs_sum;
        row.seconds = res.fit_seconds;
        row.status = "ok";
      } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
      }
      std::lock_guard lock(log_mutex);
      std::cerr << "config " << row.config << " replicate " << row.replicate << ": " << row.status
                << "\n";
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(rows.size())));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  io::CsvTable csv;
  csv.header = {"config", "case", "n", "p", "rho", "snr", "replicate", "status",
                "pe", "l2", "fp", "fn", "ari", "max_abs_sum", "fit_seconds"};
  auto prefix = [&](std::size_t c) {
    const SimConfig& s = g.configs[c];
    return std::vector<std::string>{std::to_string(c), to_string(s.cov_case), std::to_string(s.n),
                                    std::to_string(s.p), io::format_double(s.rho),
                                    io::format_double(s.snr)};
  };
  int failures = 0;
  for (const ReplicateRow& row : rows) {
    std::vector<std::string> line = prefix(row.config);
    line.push_back(std::to_string(row.replicate));
    line.push_back(row.status);
    if (row.status == "ok") {
      for (double v : {row.report.pe, row.report.l2}) line.push_back(io::format_double(v));
      line.push_back(std::to_string(row.report.fp));
      line.push_back(std::to_string(row.report.fn));
      line.push_back(io::format_double(row.report.ari));
      line.push_back(io::format_double(row.max_abs_sum));
      line.push_back(io::format_double(row.seconds));
    } else {
      ++failures;
      line.insert(line.end(), 7, "");
    }
    csv.rows.push_back(std::move(line));
  }
  for (std::size_t c = 0; c < g.configs.size(); ++c) {
    std::vector<double> pe, l2, fp, fn, ari, sums, secs;
    int ok = 0;
    for (const ReplicateRow& row : rows) {
      if (row.config != c || row.status != "ok") continue;
      ++ok;
      pe.push_back(row.report.pe);
      l2.push_back(row.report.l2);
      fp.push_back(row.report.fp);
      fn.push_back(row.report.fn);
      ari.push_back(row.report.ari);
      sums.push_back(row.max_abs_sum);
      secs.push_back(row.seconds);
    }
    std::vector<std::string> line = prefix(c);
    line.push_back("aggregate");
    line.push_back(std::to_string(ok) + "/" + std::to_string(g.replicates) + " ok");
    for (const auto* v : {&pe, &l2, &fp, &fn, &ari, &sums, &secs}) line.push_back(mean_sd(*v));
    csv.rows.push_back(std::move(line));
  }
  io::write_csv(out / "benchmark.csv", csv);
  manifest["timings_seconds"]["total"] = clock.lap();
  write_manifest(out, manifest);
  std::cout << "wrote " << (out / "benchmark.csv").string() << " (" << rows.size()
            << " replicates, " << failures << " failed)\n";
  return 0;
}

}  // namespace

void add_benchmark(CLI::App& app, std::function<int()>& action) {
  auto args = std::make_shared<BenchmarkArgs>();
  BenchmarkArgs& a = *args;
  CLI::App* cmd = app.add_subcommand("benchmark", "Simulate, fit, summarize and score a grid");
  cmd->add_option("--grid", a.grid, "Grid JSON: configs, replicates, chain, summary, seed")->required();
  cmd->add_option("--out", a.out, "Output directory");
  cmd->add_option("--jobs", a.jobs, "Concurrent replicates (default BRACE_THREADS)");
  cmd->add_option("--seed", a.seed, "Base seed; overrides the grid's");
  cmd->add_option("--replicates", a.replicates, "Replicates per config; overrides the grid's");
  action = [cmd, args] { return run_benchmark(*cmd, *args); };
}

}  // namespace brace::cli
