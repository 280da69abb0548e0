#include <iostream>
#include <string>
#include <vector>

#include "bine/cli.hpp"

int main(int argc, char** argv) {
  return bine::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
