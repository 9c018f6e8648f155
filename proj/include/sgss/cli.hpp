#pragma once

// The `sgss` command line. Exit codes: 0 success, 1 usage error, 2 data or
// coverage error, 3 fit did not converge.

#include <iosfwd>
#include <string>
#include <vector>

namespace sgss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNoConvergence = 3;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sgss::cli
