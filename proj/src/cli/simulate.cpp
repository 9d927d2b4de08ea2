#include <iostream>
#include <memory>

#include "support.hpp"

namespace brace::cli {
namespace {

struct SimulateArgs {
  SimConfig cfg;
  std::string cov_case = "dep1";
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config;
};

int run_simulate(const CLI::App& cmd, SimulateArgs& a) {
  const json file = load_config(a.config);
  from_config(file, cmd, "--n", "n", a.cfg.n);
  from_config(file, cmd, "--p", "p", a.cfg.p);
  from_config(file, cmd, "--case", "case", a.cov_case);
  from_config(file, cmd, "--rho", "rho", a.cfg.rho);
  from_config(file, cmd, "--snr", "snr", a.cfg.snr);
  from_config(file, cmd, "--train-fraction", "train_fraction", a.cfg.train_fraction);
  from_config(file, cmd, "--out", "out", a.out);
  if (cmd.count("--seed") == 0 && file.contains("seed")) a.seed = file.at("seed").get<std::uint64_t>();
  if (a.out.empty()) throw UsageError("--out is required");
  a.cfg.seed = require_seed(a.seed);
  a.cfg.cov_case = parse_covariance_case(a.cov_case);
  a.cfg.validate();

  Stopwatch clock;
  json manifest = make_manifest("simulate", io::to_json(a.cfg), a.cfg.seed);
  manifest["notes"] = json::array(
      {"beta template projected to zero sum by subtracting the mean of its nonzero entries"});
  write_manifest(a.out, manifest);

  const SimulatedData data = simulate_dataset(a.cfg);
  manifest["timings_seconds"]["simulate"] = clock.lap();
  write_simulation(a.out, data, a.cfg);
  manifest["timings_seconds"]["write"] = clock.lap();
  write_manifest(a.out, manifest);
  std::cout << "wrote " << data.train_rows.size() << " training and " << data.test_rows.size()
            << " test samples to " << a.out << "\n";
  return 0;
}

}  // namespace

void add_simulate(CLI::App& app, std::function<int()>& action) {
  auto args = std::make_shared<SimulateArgs>();
  CLI::App* cmd = app.add_subcommand("simulate", "Generate a synthetic compositional dataset");
  cmd->add_option("--n", args->cfg.n, "Number of samples")->capture_default_str();
  cmd->add_option("--p", args->cfg.p, "Number of features (at least 37)")->capture_default_str();
  cmd->add_option("--case", args->cov_case, "Covariance case: dep1 or dep2")->capture_default_str();
  cmd->add_option("--rho", args->cfg.rho, "Dep1 correlation decay")->capture_default_str();
  cmd->add_option("--snr", args->cfg.snr, "Signal-to-noise ratio")->capture_default_str();
  cmd->add_option("--seed", args->seed, "64-bit seed (required)");
  cmd->add_option("--train-fraction", args->cfg.train_fraction, "Training share")->capture_default_str();
  cmd->add_option("--out", args->out, "Output directory");
  cmd->add_option("--config", args->config, "JSON config; flags override its keys");
  action = [cmd, args] { return run_simulate(*cmd, *args); };
}

}  // namespace brace::cli
