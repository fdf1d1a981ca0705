#include "ucbmo/cli.hpp"

int main(int argc, char** argv) { return ucbmo::run_cli(argc, argv); }
