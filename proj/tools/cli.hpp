#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace augur::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitEmpty = 2;

/// Entry point shared by the executable and the tests. `args[0]` is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace augur::cli
