#include "regret_lab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return regret_lab::run_cli(argc, argv, std::cout, std::cerr); }
