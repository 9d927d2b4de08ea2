#include <iostream>
#include <map>
#include <memory>

#include "brace/pipeline.hpp"
#include "brace/preprocessing.hpp"
#include "support.hpp"

namespace brace::cli {
namespace {

struct EvaluateArgs {
  std::string run, data, out;
};

Vector to_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

int run_evaluate(EvaluateArgs& a) {
  const fs::path run(a.run);
  const fs::path data_dir(a.data);
  if (a.out.empty()) a.out = (run / "eval.json").string();
  const json summary_json = io::read_json(run / "summary.json");
  const json centering = io::read_json(run / "centering.json");
  const json truth_json = io::read_json(data_dir / "truth.json");

  const auto fit_names = centering.at("feature_names").get<std::vector<std::string>>();
  const io::SampleTable test = io::read_sample_table(data_dir / "test.csv");
  std::map<std::string, Index> column;
  for (std::size_t c = 1; c < test.columns.size(); ++c) column[test.columns[c]] = static_cast<Index>(c);

  // Rebuild the test design over the fitted features with the training transform.
  Matrix raw(test.values.rows(), static_cast<Index>(fit_names.size()));
  for (std::size_t j = 0; j < fit_names.size(); ++j) {
    auto it = column.find(fit_names[j]);
    if (it == column.end()) throw IoError("test.csv lacks feature '" + fit_names[j] + "'");
    raw.col(static_cast<Index>(j)) = test.values.col(it->second);
  }
  const Matrix X = centering.at("log_input").get<bool>()
                       ? raw
                       : to_log_relative_abundance(raw, centering.at("pseudocount").get<double>());
  Dataset reference;
  reference.x_means = to_vector(centering.at("x_means"));
  reference.y_mean = centering.at("y_mean").get<double>();
  const Dataset test_set = center_like(reference, X, test.values.col(0));

  // Truth is indexed by the simulated feature order; fitted features may be a subset.
  SimulationTruth truth;
  truth.beta_true = to_vector(truth_json.at("beta_true"));
  truth.partition_true = truth_json.at("partition_true").get<Labels>();
  std::vector<std::string> all_names(test.columns.begin() + 1, test.columns.end());
  PosteriorSummary summary;
  summary.beta_mean = Vector::Zero(truth.beta_true.size());
  summary.selected.assign(static_cast<std::size_t>(truth.beta_true.size()), false);
  summary.point_partition.assign(summary.selected.size(), 0);
  const Vector fitted_mean = to_vector(summary_json.at("beta_mean"));
  const auto fitted_sel = summary_json.at("selected").get<std::vector<int>>();
  const auto fitted_part = summary_json.at("partition").get<Labels>();
  std::map<std::string, Index> truth_index;
  for (std::size_t j = 0; j < all_names.size(); ++j) truth_index[all_names[j]] = static_cast<Index>(j);
  for (std::size_t j = 0; j < fit_names.size(); ++j) {
    const Index t = truth_index.at(fit_names[j]);
    summary.beta_mean[t] = fitted_mean[static_cast<Index>(j)];
    summary.selected[static_cast<std::size_t>(t)] = fitted_sel[j] != 0;
    summary.point_partition[static_cast<std::size_t>(t)] = fitted_part[j];
  }

  EvalReport report;
  report.pe = prediction_error(test_set.y, test_set.X, fitted_mean);
  report.l2 = l2_loss(truth.beta_true, summary.beta_mean);
  const SelectionErrors e = selection_errors(summary.selected, truth.beta_true);
  report.fp = e.fp;
  report.fn = e.fn;
  report.ari = adjusted_rand_index(summary.point_partition, truth.partition_true);
  io::write_json(a.out, io::to_json(report));
  std::cout << io::to_json(report).dump() << "\n";
  return 0;
}

}  // namespace

void add_evaluate(CLI::App& app, std::function<int()>& action) {
  auto args = std::make_shared<EvaluateArgs>();
  CLI::App* cmd = app.add_subcommand("evaluate", "Score a summarized fit against simulation truth");
  cmd->add_option("--run", args->run, "Directory with summary.json and centering.json")->required();
  cmd->add_option("--data", args->data, "Directory written by simulate")->required();
  cmd->add_option("--out", args->out, "Report path (default: RUN/eval.json)");
  action = [args] { return run_evaluate(*args); };
}

}  // namespace brace::cli
