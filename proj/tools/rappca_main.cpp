#include <string>
#include <vector>

#include "rappca/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rappca::run_cli(args);
}
