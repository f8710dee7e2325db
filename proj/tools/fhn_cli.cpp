#include "fhn/cli.hpp"

int main(int argc, char** argv) { return fhn::run_cli(argc, argv); }
