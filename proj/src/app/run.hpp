#pragma once

#include <string>
#include <vector>

#include "app/config.hpp"

namespace levyopt {

inline constexpr const char* kLevyoptVersion = "1.0.0";

struct RunResult {
  /// 0 success, 3 solver conditions failed, 4 verification assertion failed.
  int status = 0;
  std::string text;  // human-readable tables
  std::vector<std::string> files;
};

/// "model validate", "measure solve", "simulate", "strategy evaluate",
/// "verify run", "report". Throws the library errors for config and solver
/// failures; every artifact goes to cfg.out_dir.
RunResult run_command(const std::string& command, const RunConfig& cfg);

}  // namespace levyopt
