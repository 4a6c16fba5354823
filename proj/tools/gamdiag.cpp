#include "gamdiag/cli.hpp"

int main(int argc, char** argv) { return gamdiag::run_cli(argc, argv); }
