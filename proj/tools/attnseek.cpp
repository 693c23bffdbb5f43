#include <iostream>
#include <string>
#include <vector>

#include "attnseek/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return attnseek::run_cli(args, std::cout, std::cerr);
}
