#pragma once

#include <iosfwd>
#include <string_view>

#include "chameleon/angle.hpp"

namespace chameleon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `chameleon` tool: run, scan, bell, contextual, serve-station.
/// Returns 0 on success, 1 on a runtime failure, 2 on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Radians by default; a "deg" suffix converts exactly as deg * pi / 180.
/// Throws ConfigError on anything else.
Angle parse_angle(std::string_view text);

}  // namespace chameleon::cli
