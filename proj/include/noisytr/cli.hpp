#pragma once

#include <iosfwd>

namespace noisytr {

// Exit codes: 0 success, 1 a verification command found a violation,
// 2 configuration or usage error, 3 numeric failure, 4 internal error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace noisytr
