#include "jstpc/cli.hpp"

int main(int argc, char** argv) { return jstpc::cli::run_cli(argc, argv); }
