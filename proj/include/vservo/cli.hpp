#pragma once

#include <iosfwd>

namespace vservo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;  // usage and configuration errors
inline constexpr int kExitIo = 3;

/// Full command-line behavior of the vservo tool, with the process streams
/// passed in so it can be driven from tests. Environment overrides are read
/// from the process environment.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vservo::cli
