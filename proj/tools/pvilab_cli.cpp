#include <iostream>

#include "pvilab/cli.hpp"

int main(int argc, char** argv) { return pvilab::cli_main(argc, argv, std::cout, std::cerr); }
