#include <iostream>

#include "screening/cli.hpp"

int main(int argc, char** argv) {
  return screening::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
