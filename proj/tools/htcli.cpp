#include <iostream>
#include <string>
#include <vector>

#include "ht/cli_io.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    std::cout << "usage: htcli <command> key=value ... [config=file] [output=file]\n"
                 "commands: sieve classgroup census-vertical census-horizontal census-smoothed\n"
                 "          dh equidist constants verify cache-build cache-merge\n";
    return args.empty() ? 2 : 0;
  }
  return ht::run_main(args, std::cout, std::cerr);
}
