#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ptcoord::milp {

enum class VarKind : std::uint8_t { Continuous, Binary };
enum class RowSense : std::uint8_t { LessEqual, Equal, GreaterEqual };

struct Term {
  int var;
  double coef;
};

/// Sparse affine expression sum(coef * var) + constant.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}  // NOLINT(implicit)

  static LinExpr var(int index, double coef = 1.0) {
    LinExpr e;
    e.add(index, coef);
    return e;
  }

  LinExpr& add(int index, double coef) {
    if (coef != 0.0) terms_.push_back({index, coef});
    return *this;
  }
  LinExpr& add(const LinExpr& other, double scale = 1.0);
  LinExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  LinExpr& operator+=(const LinExpr& o) { return add(o, 1.0); }
  LinExpr& operator-=(const LinExpr& o) { return add(o, -1.0); }
  LinExpr& operator*=(double s);

  /// Merge duplicate indices and drop zeros; terms end up sorted by index.
  void normalize();

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }
  double evaluate(const std::vector<double>& x) const;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator*(double s, LinExpr a);

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;  // sorted by variable, no duplicates
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

/// Minimization model. Names are unique across variables and across rows.
class Model {
 public:
  int add_variable(std::string name, double lower, double upper, VarKind kind = VarKind::Continuous);
  int add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, VarKind::Binary); }

  /// lhs (sense) rhs; the expression constant is moved to the right-hand side.
  int add_constraint(std::string name, LinExpr lhs, RowSense sense, double rhs = 0.0);

  void set_objective(LinExpr objective);
  void set_bounds(int var, double lower, double upper);

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  int num_binaries() const;

  const Variable& variable(int j) const { return vars_[j]; }
  const Constraint& constraint(int i) const { return rows_[i]; }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }

  /// Dense objective coefficients, one per variable.
  std::vector<double> objective_coefficients() const;
  double objective_constant() const { return objective_.constant(); }
  const LinExpr& objective() const { return objective_; }

  int find_variable(std::string_view name) const;
  int find_constraint(std::string_view name) const;

  /// Row activity sum(a_ij x_j) without the rhs.
  double activity(int row, const std::vector<double>& x) const;
  /// Largest bound or row violation of x (integrality not included).
  double max_violation(const std::vector<double>& x) const;
  double objective_value(const std::vector<double>& x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  LinExpr objective_;
  std::unordered_map<std::string, int> var_index_;
  std::unordered_map<std::string, int> row_index_;
};

enum class SolveStatus : std::uint8_t { Optimal, Infeasible, Unbounded, GapLimit, IterationLimit };

const char* to_string(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  double best_bound = 0.0;
  double gap = 0.0;
  long nodes = 0;
  long lp_iterations = 0;
  double seconds = 0.0;
  // Filled by LP solves only.
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;

  bool has_point() const { return !values.empty(); }
};

}  // namespace ptcoord::milp
