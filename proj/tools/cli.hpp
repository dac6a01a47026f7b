#pragma once

#include <exception>
#include <string>
#include <vector>

namespace polymesh::cli {

inline constexpr const char* kVersion = "polymesh 1.0.0";

// Process exit codes.
enum Exit : int {
    kOk = 0,
    kParse = 1,      // bad flags, malformed body or artifact, bad input
    kNormalize = 2,  // flat body, normalization failed
    kMesh = 3,       // mesh quality, separation, degree budget
    kVerifyFail = 4, // certification did not reach the target
    kInternal = 5,
};

int exit_code_for(const std::exception& e);

// Entry point shared by the binary and the tests. Output goes to stdout,
// diagnostics to stderr.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace polymesh::cli
