#include <iostream>

#include "popsym/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return popsym::run_cli(args, std::cout, std::cerr);
}
