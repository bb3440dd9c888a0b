#include "robreg/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return robreg::run_cli(argc, argv, std::cout, std::cerr); }
