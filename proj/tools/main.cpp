#include <iostream>
#include <string>
#include <vector>

#include "robust_mspca/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return robust_mspca::cli::run_command(args, std::cout, std::cerr);
}
