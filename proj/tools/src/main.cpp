#include <iostream>
#include <string>
#include <vector>

#include "gprobe/cli/app.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return gprobe::cli::run(args, std::cout, std::cerr);
}
