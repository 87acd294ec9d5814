#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tagsync {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitInsufficientData = 3;

/// Entry point of the tagsync tool: simulate | regress | controller | sweep-beta.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tagsync
