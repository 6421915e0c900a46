#include <iostream>

#include "febvp/cli.hpp"

int main(int argc, char** argv) { return febvp::cli::run(argc, argv, std::cout, std::cerr); }
