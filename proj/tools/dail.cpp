#include <string>
#include <vector>

#include "dail/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dail::run_command(args);
}
