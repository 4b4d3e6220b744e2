#include "tttbench/cli.hpp"

int main(int argc, char** argv) { return tttbench::run_cli(argc, argv); }
