#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "ichem/harness.hpp"

namespace ichem {

// Shortest decimal representation that round-trips; "nan", "inf", "-inf"
// for non-finite values. Output is locale-independent.
std::string format_double(double v);

// t,S,x,y,meanS,meanx,meany,lnx_over_t,lny_over_t,phi
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const CrispModel& model);

// t,mark
void write_jumps_csv(std::ostream& os, const Trajectory& traj, const CrispModel& model);

// t, then <q>_mean,<q>_p5,<q>_p50,<q>_p95 per quantity, then
// extinct_x_frac,extinct_y_frac.
void write_ensemble_csv(std::ostream& os, const EnsembleSummary& summary);

// One row per path with its final-time statistics.
void write_terminal_csv(std::ostream& os, const EnsembleSummary& summary);

// p, crisp parameters, betas, thresholds, regime, terminal statistics, verdict.
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

// claim,source,relation,predicted,empirical,tolerance,passed
void write_verdict_csv(std::ostream& os, const Verdict& verdict);

} // namespace ichem
