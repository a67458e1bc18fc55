#include <iostream>

#include "autodsm/cli.hpp"

int main(int argc, char** argv) {
  return autodsm::cli::run_cli(argc, argv, std::cout, std::cerr);
}
