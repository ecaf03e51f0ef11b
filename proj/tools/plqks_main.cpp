#include "plqks/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    return plqks::cli::run(args, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "plqks: " << e.what() << '\n';
    return plqks::cli::kInputError;
  }
}
