#include "sensopt/cli.hpp"

int main(int argc, char** argv) {
  return sensopt::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
