#include <iostream>
#include <string>
#include <vector>

#include "nel/tools/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nel::tools::run_cli(args, std::cout, std::cerr);
}
