#include <iostream>
#include <string>
#include <vector>

#include "csid/app/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return csid::app::run_cli(args, std::cout, std::cerr);
}
