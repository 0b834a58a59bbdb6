#include <iostream>

#include "vservo/cli.hpp"

int main(int argc, char** argv) {
  return vservo::cli::run_cli(argc, argv, std::cout, std::cerr);
}
