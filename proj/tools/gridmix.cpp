#include <iostream>

#include "gridmix/cli.hpp"

int main(int argc, char** argv) {
  return gridmix::cli::run(argc, argv, std::cout, std::cerr);
}
