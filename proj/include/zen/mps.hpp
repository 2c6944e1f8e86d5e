#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "zen/model.hpp"
#include "zen/solve.hpp"

namespace zen {

/// Free-format MPS. Binaries are written with BV bounds. Semi-continuous
/// columns rely on their paired binary and linking rows; one without a pair
/// gets an auxiliary binary `<name>#on` and two linking rows. The objective
/// constant is written as the negated RHS of the objective row.
std::string to_mps(const MilpModel& model);
void export_mps(const MilpModel& model, const std::filesystem::path& path);

/// Reads `name value` lines; blank lines and lines starting with '#' are skipped.
std::map<std::string, double> read_solution_file(const std::filesystem::path& path);

/// Runs an external solver as a subprocess. `command` may contain {mps} and
/// {sol}, replaced by the model file and the solution file it must write.
/// The report's objective is re-evaluated on the model; status is Optimal if
/// the solution file is complete, NumericalFailure otherwise.
SolveReport solve_external(const MilpModel& model, const std::string& command,
                           const std::filesystem::path& workdir);

}  // namespace zen
