#include "fshadow/cli/commands.hpp"

int main(int argc, char** argv) { return fshadow::cli::run_cli(argc, argv); }
