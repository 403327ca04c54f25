#include "lsam/cli.hpp"

int main(int argc, char** argv) { return lsam::run_cli(argc, argv); }
