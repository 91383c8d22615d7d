#include <iostream>

#include "betarisk/cli.hpp"

int main(int argc, char** argv) {
  return betarisk::cli::run(argc, argv, std::cout, std::cerr);
}
