#include "ilpcm/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ilpcm::cli::run(argc, argv, std::cout, std::cerr); }
