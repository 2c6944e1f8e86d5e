#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace zen {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary, SemiContinuous };
enum class Sense { LessEqual, Equal, GreaterEqual };

/// A semi-continuous variable takes 0 or a value in [sc_lower, upper]. When
/// `paired_binary` is set, linking rows x <= upper*b and x >= sc_lower*b are
/// part of the model and branching on b enforces the domain.
struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInf;
  double sc_lower = 0.0;
  int paired_binary = -1;
};

struct Term {
  int col;
  double coef;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;  // sorted by column, no duplicates, no zeros
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// Mixed-integer linear program, minimization. Names are unique and map to
/// column/row indices.
class MilpModel {
public:
  std::string variant;

  int add_variable(std::string name, VarKind kind, double lower, double upper);
  /// Semi-continuous x in {0} U [sc_lower, upper], linked to `paired_binary` (may be -1).
  int add_semicontinuous(std::string name, double sc_lower, double upper, int paired_binary);
  /// Terms on the same column are merged; zero coefficients dropped.
  int add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs);
  void add_objective(int col, double coef);
  void add_objective_constant(double c) { objective_constant_ += c; }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<double>& objective() const { return obj_; }
  double objective_constant() const { return objective_constant_; }

  std::size_t num_vars() const { return vars_.size(); }
  std::size_t num_rows() const { return rows_.size(); }
  std::size_t num_integer() const;

  /// Column index by name, or -1.
  int col(std::string_view name) const;
  /// Row index by name, or -1.
  int row(std::string_view name) const;
  const Variable& var(int j) const { return vars_.at(static_cast<std::size_t>(j)); }
  Variable& var(int j) { return vars_.at(static_cast<std::size_t>(j)); }

  double evaluate_objective(const std::vector<double>& x) const;
  double activity(const Constraint& row, const std::vector<double>& x) const;

  bool operator==(const MilpModel& o) const {
    return variant == o.variant && same_structure(o);
  }
  /// Same variables, rows and objective (names included), ignoring the variant tag.
  bool same_structure(const MilpModel& o) const;

private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> obj_;
  double objective_constant_ = 0.0;
  std::unordered_map<std::string, int> col_index_;
  std::unordered_map<std::string, int> row_index_;
};

bool operator==(const Variable& a, const Variable& b);
bool operator==(const Term& a, const Term& b);
bool operator==(const Constraint& a, const Constraint& b);

}  // namespace zen
