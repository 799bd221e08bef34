#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fz::cli {

/// Process exit codes of the fzgp tool.
enum ExitCode : int {
    kOk = 0,
    kVerificationFailed = 1,
    kUsage = 2,
    kIoError = 3,
    kCorruptContainer = 4,
    kStrictOverflow = 5,
    kInvalidData = 6,
};

/// Runs the tool on `args` (without the program name), writing results to `out` and
/// diagnostics to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace fz::cli
