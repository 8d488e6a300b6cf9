#include <iostream>

#include "exciton/cli/app.hpp"

int main(int argc, char** argv) { return exciton::cli::run(argc, argv, std::cout, std::cerr); }
