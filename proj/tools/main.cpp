#include <string>
#include <vector>

#include "swtail/cli.hpp"

int main(int argc, char** argv) {
  return swtail::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
