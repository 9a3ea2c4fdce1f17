#include "lowmach/cli.hpp"

int main(int argc, char** argv) { return lowmach::run_cli(argc, argv); }
