#include <fstream>
#include <iostream>
#include <memory>

#include <omp.h>

#include "brace/gibbs_sampler.hpp"
#include "brace/preprocessing.hpp"
#include "support.hpp"

namespace brace::cli {
namespace {

struct FitArgs {
  std::string data, x, y, y_column, out, config, strategy = "auto";
  double pseudocount = 0.5;
  double min_total = 0.0;
  bool log_input = false;
  ChainConfig chain;
  std::optional<std::uint64_t> seed;
  std::optional<double> a_sigma, b_sigma, a_gamma, b_gamma, a_alpha, b_alpha, alpha0;
  int threads = 0;
};

struct LoadedInput {
  CountMatrix counts;
  Vector y;
};

LoadedInput load_input(const FitArgs& a) {
  LoadedInput in;
  if (!a.data.empty()) {
    io::SampleTable t = io::read_sample_table(fs::path(a.data) / "train.csv");
    if (t.columns.empty() || t.columns.front() != "y") {
      throw IoError(a.data + "/train.csv: first data column must be 'y'");
    }
    in.y = t.values.col(0);
    in.counts.values = t.values.rightCols(t.values.cols() - 1);
    in.counts.feature_names.assign(t.columns.begin() + 1, t.columns.end());
    in.counts.sample_ids = t.sample_ids;
  } else {
    if (a.x.empty() || a.y.empty()) throw UsageError("give --data DIR or both --x and --y");
    io::SampleTable t = io::read_sample_table(a.x);
    in.counts.values = std::move(t.values);
    in.counts.feature_names = std::move(t.columns);
    in.counts.sample_ids = std::move(t.sample_ids);
    in.y = io::read_response(a.y, in.counts.sample_ids, a.y_column);
  }
  return in;
}

json resolved_config(const FitArgs& a, const Hyperparams& hp) {
  json cfg = io::to_json(a.chain);
  cfg["hyperparams"] = io::to_json(hp);
  cfg["input"] = {{"data", a.data},         {"x", a.x},
                  {"y", a.y},               {"y_column", a.y_column},
                  {"pseudocount", a.pseudocount}, {"min_total", a.min_total},
                  {"log_input", a.log_input}};
  cfg["threads"] = a.threads;
  return cfg;
}

int run_fit(const CLI::App& cmd, FitArgs& a) {
  const json file = load_config(a.config);
  from_config(file, cmd, "--data", "data", a.data);
  from_config(file, cmd, "--x", "x", a.x);
  from_config(file, cmd, "--y", "y", a.y);
  from_config(file, cmd, "--y-column", "y_column", a.y_column);
  from_config(file, cmd, "--out", "out", a.out);
  from_config(file, cmd, "--pseudocount", "pseudocount", a.pseudocount);
  from_config(file, cmd, "--min-total", "min_total", a.min_total);
  from_config(file, cmd, "--log-input", "log_input", a.log_input);
  from_config(file, cmd, "--iters", "iters", a.chain.n_iter);
  from_config(file, cmd, "--burnin", "burnin", a.chain.burn_in);
  from_config(file, cmd, "--thin", "thin", a.chain.thin);
  from_config(file, cmd, "--init-clusters", "init_clusters", a.chain.init_clusters);
  from_config(file, cmd, "--random-sweep", "random_sweep", a.chain.random_sweep);
  from_config(file, cmd, "--strategy", "strategy", a.strategy);
  from_config(file, cmd, "--threads", "threads", a.threads);
  if (cmd.count("--seed") == 0 && file.contains("seed")) a.seed = file.at("seed").get<std::uint64_t>();
  if (a.out.empty()) throw UsageError("--out is required");
  a.chain.seed = require_seed(a.seed);
  a.chain.strategy = parse_strategy(a.strategy);
  a.chain.validate();
  a.threads = resolve_threads(a.threads);
  omp_set_num_threads(a.threads);

  Stopwatch clock;
  LoadedInput in = load_input(a);
  in.counts.validate();
  const double load_seconds = clock.lap();

  const CountMatrix kept = a.min_total > 0.0 ? filter_features(in.counts, a.min_total) : in.counts;
  const Matrix X = a.log_input ? kept.values : to_log_relative_abundance(kept, a.pseudocount);
  Dataset data = center(X, in.y);
  data.feature_names = kept.feature_names;

  Hyperparams hp = Hyperparams::defaults_for(data.p());
  if (file.contains("hyperparams")) hp = io::hyperparams_from_json(file.at("hyperparams"), hp);
  const std::pair<const std::optional<double>*, double*> overrides[] = {
      {&a.a_sigma, &hp.a_sigma}, {&a.b_sigma, &hp.b_sigma}, {&a.a_gamma, &hp.a_gamma},
      {&a.b_gamma, &hp.b_gamma}, {&a.a_alpha, &hp.a_alpha}, {&a.b_alpha, &hp.b_alpha},
      {&a.alpha0, &hp.alpha0}};
  for (const auto& [flag, target] : overrides) {
    if (*flag) *target = **flag;
  }
  hp.validate();

  json manifest = make_manifest("fit", resolved_config(a, hp), a.chain.seed);
  manifest["timings_seconds"]["load"] = load_seconds;
  manifest["data"] = {{"n", data.n()}, {"p", data.p()}};
  write_manifest(a.out, manifest);
  io::write_json(fs::path(a.out) / "centering.json",
                 json{{"feature_names", data.feature_names},
                      {"x_means", std::vector<double>(data.x_means.data(),
                                                      data.x_means.data() + data.x_means.size())},
                      {"y_mean", data.y_mean},
                      {"pseudocount", a.pseudocount},
                      {"log_input", a.log_input}});
  clock.lap();

  ChainTrace trace;
  try {
    trace = run_chain(data, a.chain, hp);
  } catch (const NumericalError& e) {
    const fs::path dump = fs::path(a.out) / "state_dump.json";
    std::ofstream(dump) << (e.state_dump().empty() ? "{}" : e.state_dump()) << "\n";
    std::cerr << "numerical error: " << e.what() << "\nstate dump: " << dump.string() << "\n";
    return kNumerical;
  }
  manifest["timings_seconds"]["sample"] = clock.lap();
  io::write_trace(a.out, trace);
  manifest["timings_seconds"]["write"] = clock.lap();
  manifest["strategy_used"] = to_string(a.chain.strategy == MarginalStrategy::kAuto
                                            ? (data.p() <= a.chain.gram_max_p
                                                   ? MarginalStrategy::kGram
                                                   : MarginalStrategy::kColumnSums)
                                            : a.chain.strategy);
  write_manifest(a.out, manifest);
  std::cout << "stored " << trace.size() << " samples (n=" << data.n() << ", p=" << data.p()
            << ") in " << a.out << "\n";
  return 0;
}

}  // namespace

void add_fit(CLI::App& app, std::function<int()>& action) {
  auto args = std::make_shared<FitArgs>();
  FitArgs& a = *args;
  CLI::App* cmd = app.add_subcommand("fit", "Run the Gibbs sampler and store the trace");
  cmd->add_option("--data", a.data, "Directory with train.csv (sample_id, y, features)");
  cmd->add_option("--x", a.x, "Abundance CSV: sample_id then one column per feature");
  cmd->add_option("--y", a.y, "Response CSV: sample_id then the response");
  cmd->add_option("--y-column", a.y_column, "Response column name when --y has several");
  cmd->add_option("--pseudocount", a.pseudocount, "Replacement for zero counts")->capture_default_str();
  cmd->add_option("--min-total", a.min_total, "Drop features with smaller total")->capture_default_str();
  cmd->add_flag("--log-input", a.log_input, "--x already holds log compositions");
  cmd->add_option("--iters", a.chain.n_iter, "Gibbs iterations")->capture_default_str();
  cmd->add_option("--burnin", a.chain.burn_in, "Discarded iterations")->capture_default_str();
  cmd->add_option("--thin", a.chain.thin, "Keep every thin-th sample")->capture_default_str();
  cmd->add_option("--seed", a.seed, "64-bit seed (required)");
  cmd->add_option("--init-clusters", a.chain.init_clusters, "Initial nonzero clusters")->capture_default_str();
  cmd->add_flag("--random-sweep", a.chain.random_sweep, "Visit features in random order");
  cmd->add_option("--strategy", a.strategy, "auto, gram, column-sums or rebuild")->capture_default_str();
  cmd->add_option("--a-sigma", a.a_sigma);
  cmd->add_option("--b-sigma", a.b_sigma);
  cmd->add_option("--a-gamma", a.a_gamma);
  cmd->add_option("--b-gamma", a.b_gamma);
  cmd->add_option("--a-alpha", a.a_alpha);
  cmd->add_option("--b-alpha", a.b_alpha);
  cmd->add_option("--alpha0", a.alpha0);
  cmd->add_option("--threads", a.threads, "Worker threads (default BRACE_THREADS)");
  cmd->add_option("--out", a.out, "Output directory");
  cmd->add_option("--config", a.config, "JSON config; flags override its keys");
  action = [cmd, args] { return run_fit(*cmd, *args); };
}

}  // namespace brace::cli
