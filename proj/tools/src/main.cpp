#include <iostream>

#include "claimnet/tools/cli.hpp"

int main(int argc, char** argv) { return claimnet::tools::run_cli(argc, argv, std::cout, std::cerr); }
