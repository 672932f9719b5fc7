#include <iostream>
#include <string>
#include <vector>

#include "riemap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return riemap::run_command(args, std::cout, std::cerr);
}
