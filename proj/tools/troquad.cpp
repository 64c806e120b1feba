#include <iostream>
#include <string>
#include <vector>

#include "troquad/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return troquad::run_cli(args, std::cout, std::cerr);
}
