#include <iostream>

#include "presstop/io.hpp"

int main(int argc, char** argv) { return presstop::run_cli(argc, argv, std::cout, std::cerr); }
