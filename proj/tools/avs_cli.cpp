#include <iostream>

#include "avs/cli/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return avs::cli::run(args, std::cout, std::cerr).exit_code;
}
