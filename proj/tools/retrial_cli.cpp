#include <iostream>

#include "retrial/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return retrial::run_cli(std::move(args), std::cout, std::cerr);
}
