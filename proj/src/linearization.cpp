#include "ptcoord/linearization.hpp"

#include <algorithm>
#include <cmath>

#include "ptcoord/error.hpp"

namespace ptcoord {

using milp::LinExpr;
using milp::Model;
using milp::RowSense;

double PwlCurve::evaluate(double x) const {
  x = std::clamp(x, 0.0, upper());
  double v = intercept;
  for (int j = 0; j < segments(); ++j) {
    const double fill = std::clamp(x - knots[j], 0.0, width);
    v += slopes[j] * fill;
  }
  return v;
}

PwlCurve build_pwl(const std::function<double(double)>& curve, double x_hi, int segments, int owner) {
  if (segments < 1) fail(ErrorKind::Validation, "piecewise curve needs at least one segment");
  if (!(x_hi > 0.0)) fail(ErrorKind::Validation, "piecewise curve domain must be positive");
  PwlCurve c;
  c.owner = owner;
  c.width = x_hi / segments;
  std::vector<double> values;
  for (int j = 0; j <= segments; ++j) {
    const double x = j == segments ? x_hi : c.width * j;
    const double v = curve(x);
    if (!std::isfinite(v))
      fail(ErrorKind::Domain, "curve of entity " + std::to_string(owner) + " is not finite at x=" + std::to_string(x));
    c.knots.push_back(x);
    values.push_back(v);
  }
  c.intercept = values[0];
  for (int j = 0; j < segments; ++j) c.slopes.push_back((values[j + 1] - values[j]) / c.width);
  return c;
}

LinExpr FillOrder::total() const {
  LinExpr e;
  for (int v : fill) e.add(v, 1.0);
  return e;
}

LinExpr FillOrder::value(const PwlCurve& curve) const {
  LinExpr e(curve.intercept);
  for (std::size_t j = 0; j < fill.size(); ++j) e.add(fill[j], curve.slopes[j]);
  return e;
}

FillOrder encode_fill_order(Model& model, const PwlCurve& curve, const std::string& prefix) {
  FillOrder enc;
  enc.width = curve.width;
  const double w = curve.width;
  const int n = curve.segments();
  for (int j = 0; j < n; ++j) enc.fill.push_back(model.add_variable(prefix + "_fill" + std::to_string(j + 1), 0.0, w));
  for (int j = 0; j + 1 < n; ++j) enc.order.push_back(model.add_binary(prefix + "_full" + std::to_string(j + 1)));
  for (int j = 0; j + 1 < n; ++j) {
    const std::string s = std::to_string(j + 1);
    // w - fill_j <= w Z_j
    model.add_constraint(prefix + "_full" + s + "_lo", LinExpr::var(enc.fill[j], -1.0).add(enc.order[j], -w),
                         RowSense::LessEqual, -w);
    // fill_{j+1} <= w (1 - Z_j)
    model.add_constraint(prefix + "_full" + s + "_hi", LinExpr::var(enc.fill[j + 1]).add(enc.order[j], w),
                         RowSense::LessEqual, w);
  }
  return enc;
}

bool fill_order_holds(const FillOrder& enc, const std::vector<double>& x, double tol) {
  for (std::size_t j = 0; j + 1 < enc.fill.size(); ++j)
    if (x[enc.fill[j + 1]] > tol && x[enc.fill[j]] < enc.width - tol) return false;
  return true;
}

std::pair<double, double> interval_bounds(const LinExpr& expr, const Model& model) {
  double lo = expr.constant(), hi = expr.constant();
  for (const milp::Term& t : expr.terms()) {
    const auto& v = model.variable(t.var);
    const double a = t.coef * v.lower, b = t.coef * v.upper;
    // 0 * inf is avoided because zero coefficients never enter an expression.
    lo += std::min(a, b);
    hi += std::max(a, b);
  }
  return {lo, hi};
}

double estimate_big_m(const LinExpr& expr, const Model& model, double safety) {
  const auto [lo, hi] = interval_bounds(expr, model);
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    for (const milp::Term& t : expr.terms()) {
      const auto& v = model.variable(t.var);
      if (!std::isfinite(v.lower) || !std::isfinite(v.upper))
        fail(ErrorKind::Domain, "cannot bound expression: variable '" + v.name + "' is unbounded");
    }
  }
  return safety * std::max(std::abs(lo), std::abs(hi));
}

void big_m_linearize(Model& model, BigMPair& pair, double safety, double m_scale) {
  auto single_nonneg = [&](const LinExpr& e) {
    return e.constant() == 0.0 && e.terms().size() == 1 && e.terms()[0].coef == 1.0 &&
           model.variable(e.terms()[0].var).lower >= 0.0;
  };
  auto bounds_or_fail = [&](const LinExpr& e, const char* side) {
    const auto b = interval_bounds(e, model);
    if (!std::isfinite(b.second)) fail(ErrorKind::Domain, "pair " + pair.name + ": side " + side + " has no finite M");
    return b;
  };
  const auto g_box = bounds_or_fail(pair.g, "g");
  const auto f_box = bounds_or_fail(pair.f, "f");

  if (!single_nonneg(pair.g)) model.add_constraint(pair.name + "_g", pair.g, RowSense::GreaterEqual, 0.0);

  if (g_box.first > 1e-9) {
    // Residual can never vanish, so the multiplier side is zero.
    pair.f_forced_zero = true;
    pair.binary = -1;
    const bool single = pair.f.terms().size() == 1 && pair.f.constant() == 0.0 && pair.f.terms()[0].coef > 0.0;
    if (single && model.variable(pair.f.terms()[0].var).lower <= 0.0) {
      const int v = pair.f.terms()[0].var;
      model.set_bounds(v, model.variable(v).lower, 0.0);
    } else {
      model.add_constraint(pair.name + "_f0", pair.f, RowSense::LessEqual, 0.0);
    }
    if (!single_nonneg(pair.f)) model.add_constraint(pair.name + "_f", pair.f, RowSense::GreaterEqual, 0.0);
    return;
  }

  if (pair.m_f <= 0.0) pair.m_f = m_scale * safety * std::max(0.0, f_box.second);
  if (pair.m_g <= 0.0) pair.m_g = m_scale * safety * std::max(0.0, g_box.second);
  if (pair.m_f <= 0.0) pair.m_f = 1.0;
  if (pair.m_g <= 0.0) pair.m_g = 1.0;

  pair.binary = model.add_binary(pair.name + "_sw");
  if (!single_nonneg(pair.f)) model.add_constraint(pair.name + "_f", pair.f, RowSense::GreaterEqual, 0.0);
  // f <= M_f X
  model.add_constraint(pair.name + "_fm", LinExpr(pair.f).add(pair.binary, -pair.m_f), RowSense::LessEqual, 0.0);
  // g <= M_g (1 - X)
  model.add_constraint(pair.name + "_gm", LinExpr(pair.g).add(pair.binary, pair.m_g), RowSense::LessEqual,
                       pair.m_g);
}

BigMAudit audit_big_m(const std::vector<double>& x, const std::vector<BigMPair>& pairs) {
  BigMAudit audit;
  for (const BigMPair& p : pairs) {
    if (p.binary < 0) continue;
    const double rf = p.f.evaluate(x) / p.m_f;
    const double rg = p.g.evaluate(x) / p.m_g;
    audit.worst_ratio = std::max({audit.worst_ratio, rf, rg});
    if (rf >= 0.99 || rg >= 0.99) audit.flagged.push_back(p.name);
  }
  return audit;
}

}  // namespace ptcoord
