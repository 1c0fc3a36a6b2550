#include "alphactl/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return alphactl::cli::run_cli(argc, argv, std::cout, std::cerr); }
