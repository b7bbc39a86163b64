#include <iostream>

#include "prodsos/cli.hpp"

int main(int argc, char** argv) {
  return prodsos::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
