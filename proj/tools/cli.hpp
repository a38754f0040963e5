#pragma once

#include <iosfwd>

namespace offmoo::cli {

/// Environment variable naming the default output root. A command without
/// --out writes to $OFFMOO_OUT/<task>.
inline constexpr const char* kOutputRootEnv = "OFFMOO_OUT";

/// Entry point of the offmoo tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace offmoo::cli
