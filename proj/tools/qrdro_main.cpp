#include <iostream>

#include "qrdro/cli.hpp"

int main(int argc, char** argv) { return qrdro::cli::run(argc, argv, std::cout, std::cerr); }
