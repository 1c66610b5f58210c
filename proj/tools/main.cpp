#include <vector>

#include "gvic/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gvic::run_cli(std::move(args));
}
