#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return embfuse::cli::run(argc, argv, std::cout, std::cerr); }
