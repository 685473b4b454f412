#include <string>
#include <vector>

#include "dha/pipeline.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dha::cli_main(args);
}
