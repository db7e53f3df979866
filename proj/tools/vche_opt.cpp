#include "vche/cli/commands.hpp"

int main(int argc, char** argv) { return vche::cli::run_cli(argc, argv); }
