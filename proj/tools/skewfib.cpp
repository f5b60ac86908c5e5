#include <iostream>

#include "skewfib/cli.hpp"

int main(int argc, char** argv) { return skewfib::cli::run(argc, argv, std::cout, std::cerr); }
