#include "cli.hpp"

int main(int argc, char** argv) { return hoie::cli::run_cli(argc, argv); }
