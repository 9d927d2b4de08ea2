#include "brace/cli.hpp"

#include <iostream>

#include "support.hpp"

namespace brace::cli {

int run(int argc, const char* const* argv) {
  CLI::App app{"Bayesian compositional regression with clustered, selected coefficients"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::function<int()> simulate, fit, summarize, evaluate, benchmark;
  add_simulate(app, simulate);
  add_fit(app, fit);
  add_summarize(app, summarize);
  add_evaluate(app, evaluate);
  add_benchmark(app, benchmark);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "simulate") return simulate();
    if (name == "fit") return fit();
    if (name == "summarize") return summarize();
    if (name == "evaluate") return evaluate();
    return benchmark();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("brace");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace brace::cli
