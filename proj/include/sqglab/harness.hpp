#pragma once

#include <string>

#include "sqglab/config.hpp"
#include "sqglab/dynamics.hpp"

namespace sqglab::harness {

inline constexpr int kSchemaVersion = 1;

/// Dispatch on config["command"] (simulate, nudge, detform, diagnose,
/// lp-verify, sweep, steady, periodic). Returns the process exit status:
/// 0 success, 2 configuration error (message names the key), 3 runtime
/// blow-up (message names the last-good snapshot).
int run(RunConfig config);

/// Cartesian sweep over sweep.axis.* keys with bounded parallelism; failed
/// points are recorded in sweep.csv, never fatal.
int sweep(const RunConfig& config, int parallelism);

/// Parse a forcing spec: zero | lowmode:<amp> | cos1:<amp> | osc1:<amp>:<tau>
/// | file:<path>.
Forcing parse_forcing(const std::string& spec, const TorusGrid& grid);

/// Reload the sampled trajectory of a finished run directory.
Trajectory load_trajectory(const std::string& run_dir);

} // namespace sqglab::harness
