#pragma once

#include <string>
#include <vector>

namespace brace::cli {

enum ExitCode : int { kOk = 0, kIoError = 1, kUsage = 2, kNumerical = 3 };

/// Entry point for the `brace` executable; returns the process exit code.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace brace::cli
