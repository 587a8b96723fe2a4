#pragma once

#include <iosfwd>

#include "parea/config.hpp"

namespace parea {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerificationFailed = 2;

/// Runs one command. Artifacts go to cfg.out_dir; every command writes
/// summary.json (config echo, version, wall time, report). A one-line result
/// is printed to log. Returns 0, 2 when a verification is negative or
/// inconclusive, 1 on errors (including solver non-convergence).
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace parea
