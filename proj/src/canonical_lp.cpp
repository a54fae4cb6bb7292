#include "ptcoord/canonical_lp.hpp"

#include "ptcoord/error.hpp"

namespace ptcoord {

using milp::LinExpr;
using milp::RowSense;

double CanonicalLp::row_rhs(const Row& r, const std::vector<double>& params) const {
  double v = r.rhs;
  for (const milp::Term& t : r.rhs_params) v += t.coef * params.at(t.var);
  return v;
}

milp::Model CanonicalLp::to_model(const std::vector<double>& params) const {
  if (static_cast<int>(params.size()) != num_params) fail(ErrorKind::Validation, "LP parameter count mismatch");
  milp::Model m;
  for (const Column& c : cols) m.add_variable(c.name, c.lower, c.upper);
  auto expr = [](const Row& r) {
    LinExpr e;
    for (const milp::Term& t : r.terms) e.add(t.var, t.coef);
    return e;
  };
  for (const Row& r : equalities) m.add_constraint(r.name, expr(r), RowSense::Equal, row_rhs(r, params));
  for (const Row& r : inequalities) m.add_constraint(r.name, expr(r), RowSense::LessEqual, row_rhs(r, params));
  LinExpr obj;
  for (std::size_t j = 0; j < cols.size(); ++j) obj.add(static_cast<int>(j), cols[j].cost);
  m.set_objective(obj);
  return m;
}

CanonicalLp CanonicalLp::from_model(const milp::Model& model) {
  CanonicalLp lp;
  for (const milp::Variable& v : model.variables()) {
    if (v.kind == milp::VarKind::Binary) fail(ErrorKind::Validation, "canonical LP: variable '" + v.name + "' is binary");
    Column c{v.name, 0.0, v.lower, v.upper};
    c.implied_lower = v.lower;
    c.implied_upper = v.upper;
    lp.cols.push_back(c);
  }
  const std::vector<double> cost = model.objective_coefficients();
  for (std::size_t j = 0; j < cost.size(); ++j) lp.cols[j].cost = cost[j];
  for (const milp::Constraint& r : model.constraints()) {
    Row row;
    row.name = r.name;
    row.terms = r.terms;
    row.rhs = r.rhs;
    if (r.sense == RowSense::Equal) {
      lp.equalities.push_back(std::move(row));
      continue;
    }
    if (r.sense == RowSense::GreaterEqual) {
      for (milp::Term& t : row.terms) t.coef = -t.coef;
      row.rhs = -row.rhs;
    }
    lp.inequalities.push_back(std::move(row));
  }
  return lp;
}

}  // namespace ptcoord
