#include "zen/mps.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "zen/csv.hpp"

namespace zen {

namespace {

const char* sense_code(Sense s) {
  switch (s) {
    case Sense::LessEqual: return "L";
    case Sense::Equal: return "E";
    case Sense::GreaterEqual: return "G";
  }
  return "N";
}

}  // namespace

std::string to_mps(const MilpModel& model) {
  std::ostringstream out;
  const auto& vars = model.variables();
  const auto& rows = model.constraints();

  // Auxiliary binaries for unpaired semi-continuous columns.
  struct Aux {
    std::size_t col;
    std::string bin, up, lo;
  };
  std::vector<Aux> aux;
  for (std::size_t j = 0; j < vars.size(); ++j)
    if (vars[j].kind == VarKind::SemiContinuous && vars[j].paired_binary < 0)
      aux.push_back({j, vars[j].name + "#on", vars[j].name + "#up", vars[j].name + "#lo"});

  // Column-wise entries.
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(vars.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& t : rows[i].terms) cols[static_cast<std::size_t>(t.col)].push_back({i, t.coef});

  out << "NAME " << (model.variant.empty() ? "model" : model.variant) << "\n";
  out << "ROWS\n N obj\n";
  for (const auto& r : rows) out << " " << sense_code(r.sense) << " " << r.name << "\n";
  for (const auto& a : aux) out << " L " << a.up << "\n G " << a.lo << "\n";

  out << "COLUMNS\n";
  std::size_t next_aux = 0;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const auto& name = vars[j].name;
    const double c = model.objective()[j];
    if (c != 0.0) out << " " << name << " obj " << format_double(c) << "\n";
    for (const auto& [i, v] : cols[j]) out << " " << name << " " << rows[i].name << " " << format_double(v) << "\n";
    if (next_aux < aux.size() && aux[next_aux].col == j) {
      const auto& a = aux[next_aux];
      out << " " << name << " " << a.up << " 1\n " << name << " " << a.lo << " 1\n";
      ++next_aux;
    }
    if (c == 0.0 && cols[j].empty() && !(next_aux > 0 && aux[next_aux - 1].col == j))
      out << " " << name << " obj 0\n";
  }
  for (const auto& a : aux) {
    const auto& v = vars[a.col];
    out << " " << a.bin << " " << a.up << " " << format_double(-v.upper) << "\n";
    out << " " << a.bin << " " << a.lo << " " << format_double(-v.sc_lower) << "\n";
  }

  out << "RHS\n";
  if (model.objective_constant() != 0.0) out << " rhs obj " << format_double(-model.objective_constant()) << "\n";
  for (const auto& r : rows)
    if (r.rhs != 0.0) out << " rhs " << r.name << " " << format_double(r.rhs) << "\n";

  out << "BOUNDS\n";
  for (const auto& v : vars) {
    if (v.kind == VarKind::Binary) {
      if (v.lower == 0.0 && v.upper == 1.0) {
        out << " BV bnd " << v.name << "\n";
      } else {
        // Fixed binary (branching or presolved); keep integrality with bounds.
        out << " BV bnd " << v.name << "\n";
        out << " LO bnd " << v.name << " " << format_double(v.lower) << "\n";
        out << " UP bnd " << v.name << " " << format_double(v.upper) << "\n";
      }
      continue;
    }
    const double lo = v.lower;
    const double up = v.upper;
    if (std::isinf(lo) && lo < 0 && std::isinf(up)) {
      out << " FR bnd " << v.name << "\n";
      continue;
    }
    if (lo == up) {
      out << " FX bnd " << v.name << " " << format_double(lo) << "\n";
      continue;
    }
    if (std::isinf(lo) && lo < 0) out << " MI bnd " << v.name << "\n";
    else if (lo != 0.0) out << " LO bnd " << v.name << " " << format_double(lo) << "\n";
    if (std::isfinite(up)) out << " UP bnd " << v.name << " " << format_double(up) << "\n";
  }
  for (const auto& a : aux) out << " BV bnd " << a.bin << "\n";
  out << "ENDATA\n";
  return out.str();
}

void export_mps(const MilpModel& model, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << to_mps(model);
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::map<std::string, double> read_solution_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open solution file " + path.string());
  std::map<std::string, double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string name, value;
    if (!(ls >> name >> value))
      throw DataError("solution file line " + std::to_string(lineno) + ": expected 'name value'");
    values[name] = parse_cell(value, lineno, "value");
  }
  return values;
}

SolveReport solve_external(const MilpModel& model, const std::string& command, const std::filesystem::path& workdir) {
  std::filesystem::create_directories(workdir);
  const auto mps = workdir / "model.mps";
  const auto sol = workdir / "model.sol";
  std::filesystem::remove(sol);
  export_mps(model, mps);
  std::string cmd = command;
  auto replace = [&](const std::string& key, const std::string& with) {
    for (auto pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + with.size()))
      cmd.replace(pos, key.size(), with);
  };
  replace("{mps}", "'" + mps.string() + "'");
  replace("{sol}", "'" + sol.string() + "'");

  SolveReport rep;
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = std::system(cmd.c_str());
  rep.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rc != 0 || !std::filesystem::exists(sol)) {
    rep.status = SolveStatus::NumericalFailure;
    return rep;
  }
  const auto values = read_solution_file(sol);
  rep.values.assign(model.num_vars(), 0.0);
  bool complete = true;
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    auto it = values.find(model.variables()[j].name);
    if (it == values.end()) complete = false;
    else rep.values[j] = it->second;
  }
  if (!complete) {
    rep.status = SolveStatus::NumericalFailure;
    rep.values.clear();
    return rep;
  }
  rep.status = SolveStatus::Optimal;
  rep.objective = model.evaluate_objective(rep.values);
  const auto fc = check_feasibility(model, rep.values);
  rep.max_violation = std::max(fc.max_row_violation, fc.max_bound_violation);
  return rep;
}

}  // namespace zen
