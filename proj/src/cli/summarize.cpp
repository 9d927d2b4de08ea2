#include <iomanip>
#include <iostream>
#include <memory>

#include <omp.h>

#include "brace/posterior_summary.hpp"
#include "support.hpp"

namespace brace::cli {
namespace {

struct SummarizeArgs {
  std::string run, out, loss = "binder", select_by = "interval", config;
  double level = 0.95;
  double inclusion_threshold = 0.5;
  int restarts = 8;
  std::uint64_t seed = 0;
  int threads = 0;
};

SelectionRule parse_rule(const std::string& s) {
  if (s == "interval") return SelectionRule::kCredibleInterval;
  if (s == "inclusion") return SelectionRule::kInclusionProbability;
  throw UsageError("--select-by must be 'interval' or 'inclusion', got '" + s + "'");
}

int run_summarize(const CLI::App& cmd, SummarizeArgs& a) {
  const json file = load_config(a.config);
  from_config(file, cmd, "--run", "run", a.run);
  from_config(file, cmd, "--out", "out", a.out);
  from_config(file, cmd, "--level", "level", a.level);
  from_config(file, cmd, "--loss", "loss", a.loss);
  from_config(file, cmd, "--restarts", "restarts", a.restarts);
  from_config(file, cmd, "--seed", "seed", a.seed);
  from_config(file, cmd, "--select-by", "select_by", a.select_by);
  from_config(file, cmd, "--inclusion-threshold", "inclusion_threshold", a.inclusion_threshold);
  from_config(file, cmd, "--threads", "threads", a.threads);
  if (a.run.empty()) throw UsageError("--run is required");
  if (a.out.empty()) a.out = a.run;
  if (a.restarts < 0) throw UsageError("--restarts must be nonnegative");

  SummaryOptions opt;
  opt.level = a.level;
  opt.loss = parse_loss(a.loss);
  opt.restarts = a.restarts;
  opt.seed = a.seed;
  opt.rule = parse_rule(a.select_by);
  opt.inclusion_threshold = a.inclusion_threshold;
  omp_set_num_threads(resolve_threads(a.threads));

  json config{{"run", a.run},
              {"level", opt.level},
              {"loss", to_string(opt.loss)},
              {"restarts", opt.restarts},
              {"select_by", a.select_by},
              {"inclusion_threshold", opt.inclusion_threshold}};
  json manifest = make_manifest("summarize", config, opt.seed);
  write_manifest(a.out, manifest, "summary_manifest.json");

  Stopwatch clock;
  const ChainTrace trace = io::read_trace(a.run);
  if (trace.size() == 0) throw InvalidInput(a.run + ": trace has no stored samples");
  manifest["timings_seconds"]["load"] = clock.lap();
  const PosteriorSummary summary = summarize(trace, opt);
  manifest["timings_seconds"]["summarize"] = clock.lap();

  json out = io::to_json(summary, trace.feature_names);
  out["loss"] = to_string(opt.loss);
  out["samples"] = trace.size();
  out["expected_loss"] = expected_loss(summary.point_partition, trace, opt.loss);
  io::write_json(fs::path(a.out) / "summary.json", out);
  io::write_summary_table(fs::path(a.out) / "summary.csv", summary, trace.feature_names);
  write_manifest(a.out, manifest, "summary_manifest.json");

  std::vector<Index> chosen;
  for (Index j = 0; j < trace.p(); ++j) {
    if (summary.selected[j]) chosen.push_back(j);
  }
  std::sort(chosen.begin(), chosen.end(), [&](Index l, Index r) {
    return std::abs(summary.beta_mean[l]) > std::abs(summary.beta_mean[r]);
  });
  std::cout << chosen.size() << " of " << trace.p() << " features selected at level " << opt.level
            << "\n";
  for (Index j : chosen) {
    std::cout << std::left << std::setw(16) << trace.feature_names[j] << std::right
              << std::setw(12) << std::setprecision(4) << summary.beta_mean[j] << "  ["
              << summary.ci_lower[j] << ", " << summary.ci_upper[j] << "]  cluster "
              << summary.point_partition[j] << "\n";
  }
  return 0;
}

}  // namespace

void add_summarize(CLI::App& app, std::function<int()>& action) {
  auto args = std::make_shared<SummarizeArgs>();
  SummarizeArgs& a = *args;
  CLI::App* cmd = app.add_subcommand("summarize", "Credible intervals, selection and point partition");
  cmd->add_option("--run", a.run, "Directory written by fit");
  cmd->add_option("--out", a.out, "Output directory (default: the run directory)");
  cmd->add_option("--level", a.level, "Credible level")->capture_default_str();
  cmd->add_option("--loss", a.loss, "Partition loss: binder or vi")->capture_default_str();
  cmd->add_option("--restarts", a.restarts, "Random restarts of the partition search")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Seed for the partition search")->capture_default_str();
  cmd->add_option("--select-by", a.select_by, "interval or inclusion")->capture_default_str();
  cmd->add_option("--inclusion-threshold", a.inclusion_threshold)->capture_default_str();
  cmd->add_option("--threads", a.threads, "Worker threads (default BRACE_THREADS)");
  cmd->add_option("--config", a.config, "JSON config; flags override its keys");
  action = [cmd, args] { return run_summarize(*cmd, *args); };
}

}  // namespace brace::cli
