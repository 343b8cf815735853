#include <iostream>

#include "phg/cli.hpp"

int main(int argc, char** argv) { return phg::run_cli(argc, argv, std::cout, std::cerr); }
