#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv)
{
  std::cout.imbue(std::locale::classic());
  const std::vector<std::string> args(argv + 1, argv + argc);
  return logmq::cli::run_cli(args, std::cout, std::cerr);
}
