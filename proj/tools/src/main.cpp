#include <iostream>

#include "oversmooth_cli/cli.hpp"

int main(int argc, char** argv) {
  return oversmooth::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
