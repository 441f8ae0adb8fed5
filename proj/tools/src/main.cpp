#include <iostream>

#include "semfuse_cli/commands.hpp"

int main(int argc, char** argv) { return semfuse::cli::run_cli(argc, argv, std::cout, std::cerr); }
