#include "ptcoord/milp/presolve.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace ptcoord::milp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIntTol = 1e-6;
constexpr double kHuge = 1e12;

double row_tol(double rhs) { return 1e-6 * std::max(1.0, std::abs(rhs)); }

}  // namespace

Propagator::Propagator(const Model& model) : model_(model), col_rows_(model.num_vars()) {
  for (int i = 0; i < model.num_rows(); ++i)
    for (const Term& t : model.constraint(i).terms) col_rows_[t.var].push_back(i);
}

bool Propagator::tighten_row(int row, std::vector<double>& lower, std::vector<double>& upper,
                             std::vector<int>& changed) const {
  const Constraint& r = model_.constraint(row);
  double min_act = 0.0, max_act = 0.0;
  int min_inf = 0, max_inf = 0, min_inf_var = -1, max_inf_var = -1;
  for (const Term& t : r.terms) {
    const double lo = lower[t.var], up = upper[t.var];
    const double cmin = t.coef > 0 ? t.coef * lo : t.coef * up;
    const double cmax = t.coef > 0 ? t.coef * up : t.coef * lo;
    if (std::isfinite(cmin)) min_act += cmin; else { ++min_inf; min_inf_var = t.var; }
    if (std::isfinite(cmax)) max_act += cmax; else { ++max_inf; max_inf_var = t.var; }
  }
  const double tol = row_tol(r.rhs);
  const bool has_upper_side = r.sense != RowSense::GreaterEqual;
  const bool has_lower_side = r.sense != RowSense::LessEqual;
  if (has_upper_side && min_inf == 0 && min_act > r.rhs + tol) return false;
  if (has_lower_side && max_inf == 0 && max_act < r.rhs - tol) return false;

  auto apply = [&](int j, double new_lo, double new_up) -> bool {
    const Variable& v = model_.variable(j);
    double& lo = lower[j];
    double& up = upper[j];
    bool moved = false;
    if (v.kind == VarKind::Binary) {
      if (new_up < 1.0 - kIntTol && up > 0.5) {
        if (lo > 0.5) return false;
        up = 0.0;
        moved = true;
      }
      if (new_lo > kIntTol && lo < 0.5) {
        if (up < 0.5) return false;
        lo = 1.0;
        moved = true;
      }
    } else {
      const double width = (std::isfinite(lo) && std::isfinite(up)) ? up - lo : kInf;
      const double step = 1e-4 * std::max(1.0, std::isfinite(width) ? width : 1.0);
      if (std::abs(new_up) < kHuge && new_up < up - step) {
        if (new_up < lo - row_tol(lo)) return false;
        up = std::max(lo, new_up + 1e-9 * std::max(1.0, std::abs(new_up)));
        moved = true;
      }
      if (std::abs(new_lo) < kHuge && new_lo > lo + step) {
        if (new_lo > up + row_tol(up)) return false;
        lo = std::min(up, new_lo - 1e-9 * std::max(1.0, std::abs(new_lo)));
        moved = true;
      }
    }
    if (moved) changed.push_back(j);
    return true;
  };

  for (const Term& t : r.terms) {
    const int j = t.var;
    const double a = t.coef;
    double new_lo = -kInf, new_up = kInf;
    if (has_upper_side) {
      double residual;
      bool ok = true;
      const double cmin = a > 0 ? a * lower[j] : a * upper[j];
      if (min_inf == 0)
        residual = min_act - cmin;
      else if (min_inf == 1 && min_inf_var == j)
        residual = min_act;
      else
        ok = false;
      if (ok) {
        const double bound = (r.rhs - residual) / a;
        if (a > 0) new_up = bound; else new_lo = bound;
      }
    }
    if (has_lower_side) {
      double residual;
      bool ok = true;
      const double cmax = a > 0 ? a * upper[j] : a * lower[j];
      if (max_inf == 0)
        residual = max_act - cmax;
      else if (max_inf == 1 && max_inf_var == j)
        residual = max_act;
      else
        ok = false;
      if (ok) {
        const double bound = (r.rhs - residual) / a;
        if (a > 0) new_lo = std::max(new_lo, bound); else new_up = std::min(new_up, bound);
      }
    }
    if (!apply(j, new_lo, new_up)) return false;
  }
  return true;
}

bool Propagator::propagate(std::vector<double>& lower, std::vector<double>& upper,
                           const std::vector<int>& seeds) const {
  const int m = model_.num_rows();
  std::vector<char> queued(m, 0);
  std::deque<int> queue;
  auto enqueue_var = [&](int j) {
    for (int i : col_rows_[j])
      if (!queued[i]) {
        queued[i] = 1;
        queue.push_back(i);
      }
  };
  if (seeds.empty()) {
    for (int i = 0; i < m; ++i) {
      queued[i] = 1;
      queue.push_back(i);
    }
  } else {
    for (int j : seeds) enqueue_var(j);
  }
  long budget = 40L * std::max(m, 1) + 1000;
  std::vector<int> changed;
  while (!queue.empty() && budget-- > 0) {
    const int i = queue.front();
    queue.pop_front();
    queued[i] = 0;
    changed.clear();
    if (!tighten_row(i, lower, upper, changed)) return false;
    for (int j : changed) enqueue_var(j);
  }
  return true;
}

PresolveResult presolve_bounds(const Model& model, bool probing) {
  PresolveResult res;
  const int n = model.num_vars();
  res.lower.resize(n);
  res.upper.resize(n);
  for (int j = 0; j < n; ++j) {
    res.lower[j] = model.variable(j).lower;
    res.upper[j] = model.variable(j).upper;
  }
  Propagator prop(model);
  if (!prop.propagate(res.lower, res.upper)) {
    res.infeasible = true;
    return res;
  }
  if (probing) {
    for (int pass = 0; pass < 4; ++pass) {
      bool progress = false;
      for (int b = 0; b < n; ++b) {
        if (model.variable(b).kind != VarKind::Binary) continue;
        if (res.lower[b] > 0.5 || res.upper[b] < 0.5) continue;
        std::vector<double> lo0 = res.lower, up0 = res.upper;
        up0[b] = 0.0;
        const bool ok0 = prop.propagate(lo0, up0, {b});
        std::vector<double> lo1 = res.lower, up1 = res.upper;
        lo1[b] = 1.0;
        const bool ok1 = prop.propagate(lo1, up1, {b});
        if (!ok0 && !ok1) {
          res.infeasible = true;
          return res;
        }
        if (!ok0 || !ok1) {
          res.lower = ok0 ? std::move(lo0) : std::move(lo1);
          res.upper = ok0 ? std::move(up0) : std::move(up1);
          progress = true;
          continue;
        }
        std::vector<int> moved;
        for (int j = 0; j < n; ++j) {
          const double lo = std::min(lo0[j], lo1[j]);
          const double up = std::max(up0[j], up1[j]);
          if (lo > res.lower[j] || up < res.upper[j]) {
            res.lower[j] = std::max(res.lower[j], lo);
            res.upper[j] = std::min(res.upper[j], up);
            moved.push_back(j);
          }
        }
        if (!moved.empty()) {
          progress = true;
          if (!prop.propagate(res.lower, res.upper, moved)) {
            res.infeasible = true;
            return res;
          }
        }
      }
      if (!progress) break;
    }
  }
  for (int j = 0; j < n; ++j)
    if (model.variable(j).kind == VarKind::Binary && res.lower[j] == res.upper[j]) ++res.fixed_binaries;
  return res;
}

}  // namespace ptcoord::milp
