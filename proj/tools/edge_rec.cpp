#include "edgerec/cli/cli.hpp"

int main(int argc, char** argv) { return edgerec::cli::run_cli(argc, argv); }
