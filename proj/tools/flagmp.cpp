#include <iostream>

#include "flagmp/cli.hpp"

int main(int argc, char** argv) { return flagmp::run_cli(argc, argv, std::cout, std::cerr); }
