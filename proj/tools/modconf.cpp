#include <iostream>
#include <string>
#include <vector>

#include "modconf/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return modconf::cli::run(args, std::cout, std::cerr);
}
