#pragma once

#include <iosfwd>

#include "qrdro/evaluation.hpp"

namespace qrdro::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kInfeasible = 3 };

/// Entry point of the `qrdro` executable. Subcommands: solve, experiment,
/// export-conic, eval. Diagnostics go to `err`, results to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Header: distribution,method,delta,tau,mean_x,mean_q,mean_profit,std_profit,wtc_ratio,n_trials
/// One row per (method, delta, tau) cell; tau is empty for unconstrained cells.
void write_csv(std::ostream& out, const ExperimentReport& report);

/// Same rows with standard errors, failure counts and coverage.
void write_detail_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace qrdro::cli
