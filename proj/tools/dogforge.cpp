#include "dogforge/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return dogforge::cli::run(argc, argv, std::cout, std::cerr); }
