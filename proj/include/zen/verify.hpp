#pragma once

#include <string>
#include <vector>

#include "zen/milp.hpp"
#include "zen/solve.hpp"

namespace zen {

/// Result of re-deriving the model's physical conditions from a solution,
/// using the time data and catalog rather than the generated rows.
struct SolutionCheck {
  FeasibilityCheck rows;
  double zeb_slack = 0.0;            // compensations minus emissions, >= 0 when satisfied
  double max_closure_error = 0.0;    // |v_start - v_end| over all storages and cycles
  double max_level_error = 0.0;      // storage recursion residual
  double max_level_excess = 0.0;     // level outside [0, capacity]
  double max_hp_excess = 0.0;        // heat-pump input beyond installed capacity
  double max_cop_error = 0.0;        // |d - q / COP|
  double max_capacity_error = 0.0;   // capacity outside {0} U [x_min, x_max] or not backed by its binaries
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

/// `catalog` and `options` are the ones the model was built with.
SolutionCheck verify_solution(const MilpModel& model, const std::vector<double>& x, const TimeData& td,
                              const Catalog& catalog, const BuildOptions& options, double tol = 1e-6);

}  // namespace zen
