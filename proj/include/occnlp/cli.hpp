#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace occnlp::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2 };

/// Runs one command line (without the program name), e.g. {"split", "--input", "a.jsonl", ...}.
/// Returns 0 on success, 1 on an internal failure, 2 on a usage or validation error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace occnlp::cli
