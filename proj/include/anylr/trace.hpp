#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "anylr/averaging.hpp"
#include "anylr/problem.hpp"
#include "anylr/schedule.hpp"

namespace anylr {

// Risk readings at the requested checkpoints. averaged[i] parallels
// column_labels[i]; entries are NaN where a window has not started yet.
struct RiskTrace {
  std::vector<long> steps;
  std::vector<double> lr;  // rate used by the step at that index (0 at t=0)
  std::vector<double> excess_last;
  std::vector<std::string> column_labels;
  std::vector<std::vector<double>> averaged;
};

// Evolves the moment recursion for n_steps of sched and reads last-iterate
// and averaged risks at each checkpoint. Checkpoints must be sorted
// ascending, within [0, n_steps]; n_steps = 0 reports only the t=0 risk.
// Deterministic: identical inputs give bit-identical traces.
RiskTrace run_trajectory(const ProblemSpec& spec, const Schedule& sched,
                         long n_steps,
                         const std::vector<AveragingConfig>& averaging,
                         const std::vector<long>& checkpoints);

// Same, against a prebuilt spectrum (spares rebuilding inside sweeps).
RiskTrace run_trajectory(const Spectrum& spectrum, double noise_var,
                         const Schedule& sched, long n_steps,
                         const std::vector<AveragingConfig>& averaging,
                         const std::vector<long>& checkpoints);

// Columns: step, lr, excess_last, then one excess_<label> per config.
void write_trace_csv(const RiskTrace& trace, std::ostream& out);

}  // namespace anylr
