#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dosm::cli {

struct CommandOutcome {
  int exit_code = 0;                   // 0 success, 1 validation/runtime error, 2 usage error
  std::string human;                   // plain text, stable for golden tests
  std::optional<std::string> machine;  // only with --json
};

/// Runs one `dosm` invocation. argv[0] is the program name. Flags may also come from the
/// environment: DOSM_DATA_DIR, DOSM_LISTEN, DOSM_SEED, DOSM_JSON.
CommandOutcome run_command(const std::vector<std::string>& argv);

}  // namespace dosm::cli
