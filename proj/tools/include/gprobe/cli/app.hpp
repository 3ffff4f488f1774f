#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gprobe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNumerical = 2;

/// Runs the gprobe command line. `args` excludes the program name. Returns
/// kExitOk, kExitInput for usage and input errors or kExitNumerical for a
/// numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gprobe::cli
