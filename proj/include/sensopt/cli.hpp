#pragma once

#include <string>
#include <vector>

namespace sensopt {

namespace exit_code {
constexpr int ok = 0;
constexpr int verification_failed = 1;
constexpr int schema = 2;       // malformed JSON, schema violations, bad config
constexpr int solver = 3;       // assembly or linear-solve failures
constexpr int blowup = 4;       // combinatorial budget exceeded
constexpr int singular = 5;     // singular information matrix without regularization
}  // namespace exit_code

// Full command-line entry point (everything after argv[0]); used by the
// binary and called in-process by the tests. Writes results to the path
// given with --out and diagnostics to stderr, returns the process exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace sensopt
