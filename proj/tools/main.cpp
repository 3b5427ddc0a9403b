#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) {
  nnlogit::cli::apply_thread_env(std::cerr);
  std::vector<std::string> args(argv + 1, argv + argc);
  return nnlogit::cli::run(args, std::cout, std::cerr);
}
