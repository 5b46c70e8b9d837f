#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "modconf/error.hpp"

namespace modconf::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kInput = 3,         // unreadable or malformed input files
  kGateway = 4,       // transport-exhausted, auth-failure, provider-refusal
  kMissingFixture = 5,
  kData = 6,          // duplicate ids, unresolved records, review conflicts
  kJudgeParse = 7,    // unparseable judge output in single-record judging
};

int exit_code_for(ErrorCode code);

// Runs one subcommand. args[0] is the program name. JSON/JSONL results go to
// `out` unless written to files; logs and usage errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace modconf::cli
