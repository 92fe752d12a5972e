#include <iostream>
#include <string>
#include <vector>

#include "fnm/dispatch.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fnm::run_cli(args, std::cout, std::cerr);
}
