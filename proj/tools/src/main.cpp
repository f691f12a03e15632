#include <iostream>
#include <string>
#include <vector>

#include "brokerctl/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return brokerctl::run_cli(args, brokerctl::Registry::standard(), std::cout, std::cerr);
}
