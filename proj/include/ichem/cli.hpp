#pragma once

#include <iosfwd>

namespace ichem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitClaimFailed = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `ichem` tool. Returns 0 on success (and when every
// verified claim passes), 1 when a claim fails or an ensemble aborts, 2 on a
// usage, configuration or model-validation error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ichem::cli
