#include <iostream>

#include "accel_alloc/cli.hpp"

int main(int argc, char** argv) {
  return accel_alloc::cli::run(argc, argv, std::cout, std::cerr);
}
