#include "zen/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace zen {

int MilpModel::add_variable(std::string name, VarKind kind, double lower, double upper) {
  if (kind == VarKind::Binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  if (lower > upper) throw std::invalid_argument("variable '" + name + "': lower bound above upper bound");
  const int j = static_cast<int>(vars_.size());
  if (!col_index_.emplace(name, j).second) throw std::invalid_argument("duplicate variable name '" + name + "'");
  vars_.push_back({std::move(name), kind, lower, upper, 0.0, -1});
  obj_.push_back(0.0);
  return j;
}

int MilpModel::add_semicontinuous(std::string name, double sc_lower, double upper, int paired_binary) {
  if (sc_lower < 0.0 || sc_lower > upper)
    throw std::invalid_argument("semi-continuous '" + name + "': need 0 <= lower <= upper");
  const int j = add_variable(std::move(name), VarKind::SemiContinuous, 0.0, upper);
  vars_.back().sc_lower = sc_lower;
  vars_.back().paired_binary = paired_binary;
  return j;
}

int MilpModel::add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.col < b.col; });
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (const auto& t : terms) {
    if (t.col < 0 || static_cast<std::size_t>(t.col) >= vars_.size())
      throw std::invalid_argument("constraint '" + name + "' refers to an undeclared variable");
    if (!merged.empty() && merged.back().col == t.col)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  const int i = static_cast<int>(rows_.size());
  if (!row_index_.emplace(name, i).second) throw std::invalid_argument("duplicate constraint name '" + name + "'");
  rows_.push_back({std::move(name), std::move(merged), sense, rhs});
  return i;
}

void MilpModel::add_objective(int col, double coef) { obj_.at(static_cast<std::size_t>(col)) += coef; }

std::size_t MilpModel::num_integer() const {
  return static_cast<std::size_t>(
      std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

int MilpModel::col(std::string_view name) const {
  auto it = col_index_.find(std::string(name));
  return it == col_index_.end() ? -1 : it->second;
}

int MilpModel::row(std::string_view name) const {
  auto it = row_index_.find(std::string(name));
  return it == row_index_.end() ? -1 : it->second;
}

double MilpModel::evaluate_objective(const std::vector<double>& x) const {
  double v = objective_constant_;
  for (std::size_t j = 0; j < obj_.size(); ++j) v += obj_[j] * x.at(j);
  return v;
}

double MilpModel::activity(const Constraint& row, const std::vector<double>& x) const {
  double a = 0.0;
  for (const auto& t : row.terms) a += t.coef * x.at(static_cast<std::size_t>(t.col));
  return a;
}

bool MilpModel::same_structure(const MilpModel& o) const {
  return vars_ == o.vars_ && rows_ == o.rows_ && obj_ == o.obj_ && objective_constant_ == o.objective_constant_;
}

bool operator==(const Variable& a, const Variable& b) {
  return a.name == b.name && a.kind == b.kind && a.lower == b.lower && a.upper == b.upper &&
         a.sc_lower == b.sc_lower && a.paired_binary == b.paired_binary;
}

bool operator==(const Term& a, const Term& b) { return a.col == b.col && a.coef == b.coef; }

bool operator==(const Constraint& a, const Constraint& b) {
  return a.name == b.name && a.terms == b.terms && a.sense == b.sense && a.rhs == b.rhs;
}

}  // namespace zen
