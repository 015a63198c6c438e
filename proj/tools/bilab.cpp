#include <iostream>

#include "bilab/cli.hpp"

int main(int argc, char** argv) { return bilab::cli::run(argc, argv, std::cout, std::cerr); }
