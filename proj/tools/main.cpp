#include <iostream>

#include "spanseg/cli.hpp"

int main(int argc, char** argv) { return spanseg::run_cli(argc, argv, std::cout, std::cerr); }
