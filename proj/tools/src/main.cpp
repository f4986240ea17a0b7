#include "xids_cli/cli.hpp"

int main(int argc, char** argv) { return xids::cli::run_cli(argc, argv); }
