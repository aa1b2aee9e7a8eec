#include <string>
#include <vector>

#include "voltip/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return voltip::run(args);
}
