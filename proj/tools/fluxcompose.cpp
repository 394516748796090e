#include <iostream>

#include "fluxcompose/cli.hpp"

int main(int argc, char** argv) { return fluxcompose::cli::run(argc, argv, std::cout, std::cerr); }
