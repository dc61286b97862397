#include <iostream>

#include "gradscan/cli.hpp"

int main(int argc, char** argv) { return gradscan::cli::run(argc, argv, std::cout, std::cerr); }
