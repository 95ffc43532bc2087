#include <iostream>

#include "noisytr/cli.hpp"

int main(int argc, char** argv) { return noisytr::run_cli(argc, argv, std::cout, std::cerr); }
