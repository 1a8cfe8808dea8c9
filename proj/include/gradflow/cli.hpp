#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gradflow::cli {

// Exit codes: 0 success, 1 failed verification checks, 2 configuration or
// module errors.
inline constexpr int kExitOk = 0;
inline constexpr int kExitChecksFailed = 1;
inline constexpr int kExitError = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Same, with the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace gradflow::cli
