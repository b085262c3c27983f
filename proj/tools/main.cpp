#include <iostream>

#include "tiltflux/cli.hpp"

int main(int argc, char** argv) { return tiltflux::cli::run(argc, argv, std::cout, std::cerr); }
