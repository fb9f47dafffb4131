#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "qrelay/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return qrelay::cli::run_cli(args, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qrelay::cli::exit_usage;
  }
}
