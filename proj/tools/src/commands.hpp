#pragma once

#include <iosfwd>

#include "rnc_cli/config.hpp"
#include "rnc_cli/output.hpp"

namespace rnc::cli {

// Each command writes its data files into `out` and a one-line summary to `log`.
// Failures are reported by throwing ValidationError or SolverError.
void run_simulate(const ExperimentConfig& cfg, OutputSet& out, std::ostream& log);
void run_eigen(const ExperimentConfig& cfg, OutputSet& out, std::ostream& log);
void run_observe(const ExperimentConfig& cfg, OutputSet& out, std::ostream& log);
void run_sweep(const ExperimentConfig& cfg, OutputSet& out, std::ostream& log);
void run_control(const ExperimentConfig& cfg, OutputSet& out, std::ostream& log);

State initial_state(const DiscreteSystem& sys, const InitialSpec& spec, std::uint64_t seed);

}  // namespace rnc::cli
