#include "ptcoord/milp/model.hpp"

#include <algorithm>
#include <cmath>

#include "ptcoord/error.hpp"

namespace ptcoord::milp {

LinExpr& LinExpr::add(const LinExpr& other, double scale) {
  for (const Term& t : other.terms_) add(t.var, t.coef * scale);
  constant_ += other.constant_ * scale;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (Term& t : terms_) t.coef *= s;
  constant_ *= s;
  return *this;
}

void LinExpr::normalize() {
  std::stable_sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (const Term& t : terms_) {
    if (!merged.empty() && merged.back().var == t.var)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const Term& t) { return t.coef == 0.0; }),
               merged.end());
  terms_ = std::move(merged);
}

double LinExpr::evaluate(const std::vector<double>& x) const {
  double v = constant_;
  for (const Term& t : terms_) v += t.coef * x[t.var];
  return v;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a.add(b, 1.0); }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a.add(b, -1.0); }
LinExpr operator*(double s, LinExpr a) { return a *= s; }

int Model::add_variable(std::string name, double lower, double upper, VarKind kind) {
  if (kind == VarKind::Binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  if (std::isnan(lower) || std::isnan(upper) || lower > upper)
    fail(ErrorKind::Validation, "variable '" + name + "' has inconsistent bounds");
  if (var_index_.count(name)) fail(ErrorKind::Validation, "duplicate variable name '" + name + "'");
  const int j = num_vars();
  var_index_.emplace(name, j);
  vars_.push_back({std::move(name), kind, lower, upper});
  return j;
}

int Model::add_constraint(std::string name, LinExpr lhs, RowSense sense, double rhs) {
  if (row_index_.count(name)) fail(ErrorKind::Validation, "duplicate constraint name '" + name + "'");
  lhs.normalize();
  for (const Term& t : lhs.terms())
    if (t.var < 0 || t.var >= num_vars())
      fail(ErrorKind::Validation, "constraint '" + name + "' references an undeclared variable");
  const int i = num_rows();
  row_index_.emplace(name, i);
  rows_.push_back({std::move(name), lhs.terms(), sense, rhs - lhs.constant()});
  return i;
}

void Model::set_objective(LinExpr objective) {
  objective.normalize();
  for (const Term& t : objective.terms())
    if (t.var < 0 || t.var >= num_vars()) fail(ErrorKind::Validation, "objective references an undeclared variable");
  objective_ = std::move(objective);
}

void Model::set_bounds(int var, double lower, double upper) {
  if (lower > upper) fail(ErrorKind::Validation, "variable '" + vars_[var].name + "' has inconsistent bounds");
  vars_[var].lower = lower;
  vars_[var].upper = upper;
}

int Model::num_binaries() const {
  return static_cast<int>(
      std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) { return v.kind == VarKind::Binary; }));
}

std::vector<double> Model::objective_coefficients() const {
  std::vector<double> c(vars_.size(), 0.0);
  for (const Term& t : objective_.terms()) c[t.var] += t.coef;
  return c;
}

int Model::find_variable(std::string_view name) const {
  auto it = var_index_.find(std::string(name));
  return it == var_index_.end() ? -1 : it->second;
}

int Model::find_constraint(std::string_view name) const {
  auto it = row_index_.find(std::string(name));
  return it == row_index_.end() ? -1 : it->second;
}

double Model::activity(int row, const std::vector<double>& x) const {
  double a = 0.0;
  for (const Term& t : rows_[row].terms) a += t.coef * x[t.var];
  return a;
}

double Model::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_vars(); ++j) {
    worst = std::max(worst, vars_[j].lower - x[j]);
    worst = std::max(worst, x[j] - vars_[j].upper);
  }
  for (int i = 0; i < num_rows(); ++i) {
    const double a = activity(i, x);
    const Constraint& r = rows_[i];
    if (r.sense != RowSense::GreaterEqual) worst = std::max(worst, a - r.rhs);
    if (r.sense != RowSense::LessEqual) worst = std::max(worst, r.rhs - a);
  }
  return worst;
}

double Model::objective_value(const std::vector<double>& x) const { return objective_.evaluate(x); }

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::GapLimit: return "gap-limit";
    case SolveStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

}  // namespace ptcoord::milp
