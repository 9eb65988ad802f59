#include <iostream>

#include "vppflex/io/cli.hpp"

int main(int argc, char** argv) {
  return vppflex::io::run_cli({argv, argv + argc}, std::cout, std::cerr);
}
