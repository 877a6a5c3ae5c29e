#include <iostream>
#include <string>
#include <vector>

#include "dosm/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  const dosm::cli::CommandOutcome outcome = dosm::cli::run_command(args);
  if (outcome.machine) {
    std::cout << *outcome.machine;
    if (outcome.exit_code != 0) std::cerr << outcome.human;
  } else if (outcome.exit_code == 0) {
    std::cout << outcome.human;
  } else {
    std::cerr << outcome.human;
  }
  return outcome.exit_code;
}
