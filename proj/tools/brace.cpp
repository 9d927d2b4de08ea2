#include "brace/cli.hpp"

int main(int argc, char** argv) { return brace::cli::run(argc, argv); }
