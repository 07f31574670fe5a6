#include <iostream>

#include "adaphrase/cli.hpp"

int main(int argc, char** argv) {
  return adaphrase::run_cli(argc, argv, std::cout, std::cerr);
}
