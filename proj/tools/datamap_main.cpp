#include <vector>

#include "datamap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return datamap::cli::run(args);
}
