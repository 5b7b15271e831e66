#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pmon::cli {

enum ExitCode : int { kSuccess = 0, kNumericFailure = 1, kUsageError = 2 };

/// Runs the command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace pmon::cli
