#pragma once

#include <string_view>
#include <vector>

#include "zen/model.hpp"

namespace zen {

enum class SolveStatus { Optimal, Infeasible, Unbounded, GapLimit, TimeLimit, IterationLimit, NumericalFailure };

std::string_view to_string(SolveStatus s);

/// Column-compressed LP: min c'x + c0 s.t. row_lower <= Ax <= row_upper,
/// col_lower <= x <= col_upper. Infinite bounds are allowed.
struct LpProblem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<int> col_start;  // size cols + 1
  std::vector<int> row_index;
  std::vector<double> value;
  std::vector<double> cost;
  double cost_constant = 0.0;
  std::vector<double> col_lower, col_upper;
  std::vector<double> row_lower, row_upper;

  void add_column(const std::vector<std::pair<int, double>>& entries, double c, double lo, double hi);
};

/// LP relaxation of a model (integrality dropped, semi-continuous relaxed to [0, upper]).
LpProblem relaxation(const MilpModel& model);

struct SimplexOptions {
  double feasibility_tol = 1e-7;   // on the scaled problem
  double optimality_tol = 1e-9;
  double time_limit = 1e30;        // seconds
  std::size_t iteration_limit = 5'000'000;
  std::size_t refactor_interval = 100;
  bool scale = true;
  bool crash = true;  // triangular crash basis instead of all logicals
};

/// Simplex basis: the basic column of each row position (structurals first,
/// then one logical per row) and, per column, whether it rests at its upper bound.
struct Basis {
  std::vector<int> head;
  std::vector<char> at_upper;

  bool empty() const { return head.empty(); }
};

/// Bound trace point recorded by branch-and-bound after each processed node.
struct BoundTrace {
  double incumbent;
  double bound;
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  std::vector<double> values;
  double runtime = 0.0;  // seconds
  std::size_t nodes = 0;
  std::size_t iterations = 0;
  double gap = 0.0;
  double max_violation = 0.0;  // rows and bounds of the unscaled problem
  std::vector<BoundTrace> trace;
  Basis basis;  // final LP basis, set when solve_lp ends optimal

  bool has_solution() const { return !values.empty(); }
};

/// Bounded primal revised simplex with an LU-factorized basis, Harris ratio
/// test and a fallback to Bland's rule when progress stalls.
SolveReport solve_lp(const LpProblem& lp, const SimplexOptions& options = {});
/// Starts from `start` when it fits the problem and factors; falls back to a crash basis otherwise.
SolveReport solve_lp(const LpProblem& lp, const SimplexOptions& options, const Basis& start);

struct MilpOptions {
  double gap_tol = 1e-4;
  double integrality_tol = 1e-5;
  double feasibility_tol = 1e-6;
  double time_limit = 1e30;
  std::size_t node_limit = 1'000'000;
  std::size_t dive_rounds = 500;  // LP re-solves per diving heuristic run, 0 disables it
  SimplexOptions lp;
};

/// Best-first branch-and-bound over LP relaxations.
SolveReport solve_milp(const MilpModel& model, const MilpOptions& options = {});

struct FeasibilityCheck {
  double max_row_violation = 0.0;
  double max_bound_violation = 0.0;
  double max_integrality_violation = 0.0;
  std::string worst;  // name of the worst offender

  bool ok(double tol = 1e-6, double int_tol = 1e-5) const {
    return max_row_violation <= tol && max_bound_violation <= tol && max_integrality_violation <= int_tol;
  }
};

/// Evaluates every row, bound, integrality and semi-continuity condition.
/// Row violations are scaled by max(1, largest |coefficient * value| term).
FeasibilityCheck check_feasibility(const MilpModel& model, const std::vector<double>& x);

}  // namespace zen
