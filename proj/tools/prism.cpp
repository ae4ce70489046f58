#include <iostream>

#include <unistd.h>

#include "prism/cli.hpp"

int main(int argc, char** argv) {
  return prism::cli::run(argc, argv, {std::cin, std::cout, std::cerr, isatty(STDIN_FILENO) != 0});
}
