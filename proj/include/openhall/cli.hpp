#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "openhall/config.hpp"

namespace openhall::cli {

enum class Format { Csv, Json };

enum ExitCode : int {
  kSuccess = 0,
  kValidationFailure = 2,
  kConvergenceFailure = 3,
  kConfigFailure = 4,
};

struct RunOptions {
  Format format = Format::Csv;
  int threads = 1;
  std::uint64_t seed = 42;
};

std::string cmd_eig(const Config& doc, const RunOptions& opt);
std::string cmd_steady(const Config& doc, const RunOptions& opt);
std::string cmd_chern(const Config& doc, const RunOptions& opt);
std::string cmd_hall(const Config& doc, const RunOptions& opt);
/// Rows in sweep order; a failing row records its message in the `error` column.
std::string cmd_sweep(const Config& doc, const RunOptions& opt);

struct ValidateOutcome {
  std::string text;
  bool pass = false;
};
ValidateOutcome cmd_validate(const Config& doc, const RunOptions& opt);

/// Exit code for an exception escaping a subcommand.
int exit_code_for(const std::exception& e);

/// Full command line: `openhall <subcommand> [--config path] [--out path] [--format csv|json]
/// [--threads n] [--seed n] [--set key=value ...]`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace openhall::cli
