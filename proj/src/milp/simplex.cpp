#include "ptcoord/milp/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "basis_factor.hpp"
#include "ptcoord/error.hpp"

namespace ptcoord::milp {

using detail::BasisFactor;
using detail::ColumnView;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-7;
constexpr int kMaxRefactorFailures = 8;

enum class Outcome { Optimal, Infeasible, Unbounded, IterationLimit, Cutoff, NeedPrimal, Stalled };

double pow2_round(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) return 1.0;
  return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(s))));
}

}  // namespace

struct LpEngine::Impl {
  LpOptions opt;
  int n = 0, m = 0, total = 0;

  std::vector<int> a_start, a_index;
  std::vector<double> a_value;
  std::vector<int> r_start, r_index;
  std::vector<double> r_value;
  std::vector<double> col_scale, row_scale;
  std::vector<double> cost, lo, up;
  std::vector<int> logical_index;
  std::vector<double> logical_value;

  std::vector<VarStatus> status;
  std::vector<int> head, pos;
  std::vector<double> x, d, y;
  BasisFactor factor;
  bool has_basis = false;
  bool primal_dirty = true;
  double cutoff = kInf;
  long iters = 0;
  long iter_cap = 0;  // absolute iteration count at which the current solve stops
  std::vector<double>* trace = nullptr;

  std::vector<double> alpha_col, rho, alpha_row, work;
  std::vector<int> touched;
  std::vector<char> in_touched;
  std::vector<int> rejected;

  Impl(const Model& model, LpOptions o) : opt(o), factor(std::max(model.num_rows(), 1)) { load(model); }

  ColumnView column(int j) const {
    if (j < n) return {a_index.data() + a_start[j], a_value.data() + a_start[j], a_start[j + 1] - a_start[j]};
    return {logical_index.data() + (j - n), logical_value.data() + (j - n), 1};
  }

  void load(const Model& model) {
    n = model.num_vars();
    m = model.num_rows();
    total = n + m;
    std::vector<int> count(n + 1, 0);
    for (const Constraint& r : model.constraints())
      for (const Term& t : r.terms) ++count[t.var + 1];
    a_start.assign(n + 1, 0);
    for (int j = 0; j < n; ++j) a_start[j + 1] = a_start[j] + count[j + 1];
    a_index.resize(a_start[n]);
    a_value.resize(a_start[n]);
    std::vector<int> fill(a_start.begin(), a_start.end() - 1);
    for (int i = 0; i < m; ++i)
      for (const Term& t : model.constraint(i).terms) {
        a_index[fill[t.var]] = i;
        a_value[fill[t.var]++] = t.coef;
      }

    col_scale.assign(n, 1.0);
    row_scale.assign(m, 1.0);
    if (opt.scale) compute_scaling();
    for (int j = 0; j < n; ++j)
      for (int k = a_start[j]; k < a_start[j + 1]; ++k) a_value[k] *= row_scale[a_index[k]] * col_scale[j];

    r_start.assign(m + 1, 0);
    for (int k = 0; k < a_start[n]; ++k) ++r_start[a_index[k] + 1];
    for (int i = 0; i < m; ++i) r_start[i + 1] += r_start[i];
    r_index.resize(a_start[n]);
    r_value.resize(a_start[n]);
    std::vector<int> rfill(r_start.begin(), r_start.end() - 1);
    for (int j = 0; j < n; ++j)
      for (int k = a_start[j]; k < a_start[j + 1]; ++k) {
        const int i = a_index[k];
        r_index[rfill[i]] = j;
        r_value[rfill[i]++] = a_value[k];
      }

    logical_index.resize(m);
    logical_value.assign(m, -1.0);
    for (int i = 0; i < m; ++i) logical_index[i] = i;

    cost.assign(total, 0.0);
    std::vector<double> c = model.objective_coefficients();
    for (int j = 0; j < n; ++j) cost[j] = c[j] * col_scale[j];
    lo.assign(total, 0.0);
    up.assign(total, 0.0);
    for (int j = 0; j < n; ++j) {
      const Variable& v = model.variable(j);
      lo[j] = v.lower / col_scale[j];
      up[j] = v.upper / col_scale[j];
    }
    for (int i = 0; i < m; ++i) {
      const Constraint& r = model.constraint(i);
      const double s = row_scale[i];
      lo[n + i] = r.sense == RowSense::LessEqual ? -kInf : r.rhs * s;
      up[n + i] = r.sense == RowSense::GreaterEqual ? kInf : r.rhs * s;
    }

    status.assign(total, VarStatus::AtLower);
    pos.assign(total, -1);
    head.assign(m, -1);
    x.assign(total, 0.0);
    d.assign(total, 0.0);
    y.assign(m, 0.0);
    alpha_col.assign(m, 0.0);
    rho.assign(m, 0.0);
    work.assign(m, 0.0);
    alpha_row.assign(total, 0.0);
    in_touched.assign(total, 0);
  }

  // Geometric-mean scaling passes, rounded to powers of two.
  void compute_scaling() {
    std::vector<double> rmax(m), rmin(m);
    for (int pass = 0; pass < 6; ++pass) {
      std::fill(rmax.begin(), rmax.end(), 0.0);
      std::fill(rmin.begin(), rmin.end(), kInf);
      for (int j = 0; j < n; ++j)
        for (int k = a_start[j]; k < a_start[j + 1]; ++k) {
          const double v = std::abs(a_value[k]) * col_scale[j];
          if (v == 0.0) continue;
          const int i = a_index[k];
          rmax[i] = std::max(rmax[i], v);
          rmin[i] = std::min(rmin[i], v);
        }
      for (int i = 0; i < m; ++i)
        if (rmax[i] > 0.0) row_scale[i] = 1.0 / std::sqrt(rmax[i] * rmin[i]);
      for (int j = 0; j < n; ++j) {
        double cmax = 0.0, cmin = kInf;
        for (int k = a_start[j]; k < a_start[j + 1]; ++k) {
          const double v = std::abs(a_value[k]) * row_scale[a_index[k]];
          if (v == 0.0) continue;
          cmax = std::max(cmax, v);
          cmin = std::min(cmin, v);
        }
        if (cmax > 0.0) col_scale[j] = 1.0 / std::sqrt(cmax * cmin);
      }
    }
    for (double& s : row_scale) s = pow2_round(s);
    for (double& s : col_scale) s = pow2_round(s);
  }

  double nonbasic_value(int j) const {
    switch (status[j]) {
      case VarStatus::AtLower: return lo[j];
      case VarStatus::AtUpper: return up[j];
      default: return 0.0;
    }
  }

  VarStatus preferred_status(int j) const {
    const bool has_lo = std::isfinite(lo[j]), has_up = std::isfinite(up[j]);
    if (!has_lo && !has_up) return VarStatus::AtZero;
    if (cost[j] >= 0.0) return has_lo ? VarStatus::AtLower : VarStatus::AtUpper;
    return has_up ? VarStatus::AtUpper : VarStatus::AtLower;
  }

  void cold_basis() {
    for (int j = 0; j < n; ++j) {
      status[j] = preferred_status(j);
      pos[j] = -1;
      x[j] = nonbasic_value(j);
    }
    for (int i = 0; i < m; ++i) {
      status[n + i] = VarStatus::Basic;
      head[i] = n + i;
      pos[n + i] = i;
    }
    has_basis = true;
  }

  // Factorizes the current head; dependent columns are swapped for logicals.
  void refactor() {
    auto colfn = [this](int j) { return column(j); };
    if (factor.factorize(head, colfn)) return;
    std::vector<int> dependent, free_rows;
    detail::find_dependent_columns(m, head, colfn, dependent, free_rows);
    for (std::size_t k = 0; k < dependent.size() && k < free_rows.size(); ++k) {
      const int p = dependent[k];
      const int leaving = head[p];
      pos[leaving] = -1;
      const double v = x[leaving];
      if (!std::isfinite(lo[leaving]) && !std::isfinite(up[leaving]))
        status[leaving] = VarStatus::AtZero;
      else if (!std::isfinite(up[leaving]) ||
               (std::isfinite(lo[leaving]) && std::abs(v - lo[leaving]) <= std::abs(v - up[leaving])))
        status[leaving] = VarStatus::AtLower;
      else
        status[leaving] = VarStatus::AtUpper;
      x[leaving] = nonbasic_value(leaving);
      const int entering = n + free_rows[k];
      if (pos[entering] >= 0) continue;  // already basic elsewhere; leave for next pass
      head[p] = entering;
      pos[entering] = p;
      status[entering] = VarStatus::Basic;
    }
    if (!factor.factorize(head, colfn)) fail(ErrorKind::Numerical, "basis repair failed to produce a nonsingular basis");
    primal_dirty = true;
  }

  void compute_primal() {
    std::fill(work.begin(), work.end(), 0.0);
    for (int j = 0; j < total; ++j) {
      if (status[j] == VarStatus::Basic) continue;
      x[j] = nonbasic_value(j);
      if (x[j] == 0.0) continue;
      ColumnView c = column(j);
      for (int t = 0; t < c.size; ++t) work[c.index[t]] -= c.value[t] * x[j];
    }
    factor.ftran(work);
    for (int i = 0; i < m; ++i) x[head[i]] = work[i];
    primal_dirty = false;
  }

  double phase_cost(int j, bool phase1) const {
    if (!phase1) return cost[j];
    if (x[j] < lo[j] - opt.primal_tol) return -1.0;
    if (x[j] > up[j] + opt.primal_tol) return 1.0;
    return 0.0;
  }

  void compute_duals(bool phase1) {
    for (int i = 0; i < m; ++i) y[i] = phase_cost(head[i], phase1);
    factor.btran(y);
    for (int j = 0; j < n; ++j) {
      if (status[j] == VarStatus::Basic) {
        d[j] = 0.0;
        continue;
      }
      double s = phase1 ? 0.0 : cost[j];
      for (int k = a_start[j]; k < a_start[j + 1]; ++k) s -= a_value[k] * y[a_index[k]];
      d[j] = s;
    }
    for (int i = 0; i < m; ++i) d[n + i] = status[n + i] == VarStatus::Basic ? 0.0 : y[i];
  }

  double infeasibility(int j) const {
    if (x[j] < lo[j]) return lo[j] - x[j];
    if (x[j] > up[j]) return x[j] - up[j];
    return 0.0;
  }

  double objective_value() const {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += cost[j] * x[j];
    return s;
  }

  void load_column(int q) {
    std::fill(alpha_col.begin(), alpha_col.end(), 0.0);
    ColumnView c = column(q);
    for (int t = 0; t < c.size; ++t) alpha_col[c.index[t]] = c.value[t];
    factor.ftran(alpha_col);
  }

  void basis_change(int r, int q, double leave_value, bool leave_at_upper) {
    const int leaving = head[r];
    x[leaving] = leave_value;
    status[leaving] = leave_at_upper ? VarStatus::AtUpper : VarStatus::AtLower;
    if (!std::isfinite(lo[leaving]) && !std::isfinite(up[leaving])) status[leaving] = VarStatus::AtZero;
    pos[leaving] = -1;
    head[r] = q;
    pos[q] = r;
    status[q] = VarStatus::Basic;
    factor.update(r, alpha_col);
  }

  // Row r of B^{-1} [A -I] restricted to nonbasic columns; touched lists the nonzeros.
  void compute_pivot_row(int r) {
    for (int j : touched) {
      alpha_row[j] = 0.0;
      in_touched[j] = 0;
    }
    touched.clear();
    std::fill(rho.begin(), rho.end(), 0.0);
    rho[r] = 1.0;
    factor.btran(rho);
    for (int i = 0; i < m; ++i) {
      const double ri = rho[i];
      if (std::abs(ri) < 1e-14) continue;
      for (int k = r_start[i]; k < r_start[i + 1]; ++k) {
        const int j = r_index[k];
        if (status[j] == VarStatus::Basic) continue;
        if (!in_touched[j]) {
          in_touched[j] = 1;
          touched.push_back(j);
        }
        alpha_row[j] += ri * r_value[k];
      }
      const int lj = n + i;
      if (status[lj] != VarStatus::Basic) {
        if (!in_touched[lj]) {
          in_touched[lj] = 1;
          touched.push_back(lj);
        }
        alpha_row[lj] = -ri;
      }
    }
  }

  // ---------------------------------------------------------------- primal

  double total_infeasibility() const {
    double t = 0.0;
    for (int i = 0; i < m; ++i) t += infeasibility(head[i]);
    return t;
  }

  Outcome primal() {
    int degenerate = 0;
    int refactor_failures = 0;
    bool confirmed = false;
    // Progress check: phase 1 must shrink the infeasibility, phase 2 the objective.
    const long stall_limit = std::max<long>(500, 5L * total);
    double best_metric = kInf;
    bool best_phase1 = true;
    long best_iter = iters;
    for (;;) {
      if (iters >= iter_cap) return Outcome::IterationLimit;
      if (iters - best_iter >= stall_limit) {
        const bool p1 = total_infeasibility() > opt.primal_tol;
        const double metric = p1 ? total_infeasibility() : objective_value();
        if (p1 == best_phase1 && metric >= best_metric - 1e-9 * (1.0 + std::abs(best_metric))) return Outcome::Stalled;
        best_metric = metric;
        best_phase1 = p1;
        best_iter = iters;
      }
      if (factor.updates() >= opt.refactor_interval) {
        refactor();
        compute_primal();
      }
      bool phase1 = false;
      for (int i = 0; i < m && !phase1; ++i) phase1 = infeasibility(head[i]) > opt.primal_tol;
      compute_duals(phase1);

      const bool bland = degenerate > opt.degenerate_limit;
      int q = -1;
      double best = 0.0;
      for (int j = 0; j < total; ++j) {
        const VarStatus s = status[j];
        if (s == VarStatus::Basic || lo[j] == up[j]) continue;
        const double dj = d[j];
        double score = 0.0;
        if (s == VarStatus::AtLower && dj < -opt.dual_tol)
          score = -dj;
        else if (s == VarStatus::AtUpper && dj > opt.dual_tol)
          score = dj;
        else if (s == VarStatus::AtZero && std::abs(dj) > opt.dual_tol)
          score = std::abs(dj);
        if (score <= 0.0) continue;
        if (bland) {
          q = j;
          break;
        }
        if (score > best) {
          best = score;
          q = j;
        }
      }
      if (q < 0) {
        if (!confirmed) {
          // Confirm on a fresh factorization before declaring a result.
          refactor();
          compute_primal();
          confirmed = true;
          continue;
        }
        return phase1 ? Outcome::Infeasible : Outcome::Optimal;
      }
      confirmed = false;

      load_column(q);
      const double dir = d[q] < 0.0 ? 1.0 : -1.0;

      double theta_max = kInf;
      for (int i = 0; i < m; ++i) {
        const double a = alpha_col[i];
        if (std::abs(a) <= kPivotTol) continue;
        const int j = head[i];
        const double rate = -dir * a;
        const double v = x[j];
        double lb = lo[j], ub = up[j];
        if (v < lo[j] - opt.primal_tol) {
          lb = -kInf;
          ub = lo[j];
        } else if (v > up[j] + opt.primal_tol) {
          lb = up[j];
          ub = kInf;
        }
        if (rate > 0.0 && std::isfinite(ub))
          theta_max = std::min(theta_max, (ub - v + opt.primal_tol) / rate);
        else if (rate < 0.0 && std::isfinite(lb))
          theta_max = std::min(theta_max, (v - lb + opt.primal_tol) / -rate);
      }
      const double range = up[q] - lo[q];
      if (std::isfinite(range) && range <= theta_max) {
        // Bound flip of the entering column.
        status[q] = status[q] == VarStatus::AtLower ? VarStatus::AtUpper : VarStatus::AtLower;
        const double t = range;
        x[q] += dir * t;
        for (int i = 0; i < m; ++i) x[head[i]] -= dir * t * alpha_col[i];
        degenerate = 0;
        ++iters;
        if (!phase1 && trace) trace->push_back(objective_value());
        continue;
      }
      if (!std::isfinite(theta_max)) {
        if (phase1) {
          // Cannot happen with exact arithmetic; treat as numerical trouble.
          if (++refactor_failures > kMaxRefactorFailures) fail(ErrorKind::Numerical, "primal phase 1 stalled");
          refactor();
          compute_primal();
          continue;
        }
        return Outcome::Unbounded;
      }

      int r = -1;
      double best_abs = 0.0, step = 0.0, target = 0.0;
      bool to_upper = false;
      for (int i = 0; i < m; ++i) {
        const double a = alpha_col[i];
        if (std::abs(a) <= kPivotTol) continue;
        const int j = head[i];
        const double rate = -dir * a;
        const double v = x[j];
        double lb = lo[j], ub = up[j];
        if (v < lo[j] - opt.primal_tol) {
          lb = -kInf;
          ub = lo[j];
        } else if (v > up[j] + opt.primal_tol) {
          lb = up[j];
          ub = kInf;
        }
        double ratio;
        double bound;
        bool upper_side;
        if (rate > 0.0 && std::isfinite(ub)) {
          ratio = (ub - v) / rate;
          bound = ub;
          upper_side = (ub == up[j]);
        } else if (rate < 0.0 && std::isfinite(lb)) {
          ratio = (v - lb) / -rate;
          bound = lb;
          upper_side = !(lb == lo[j]);
        } else {
          continue;
        }
        if (ratio > theta_max) continue;
        const bool better = bland ? (r < 0 || j < head[r]) : std::abs(a) > best_abs;
        if (better) {
          best_abs = std::abs(a);
          r = i;
          step = std::max(ratio, 0.0);
          target = bound;
          to_upper = upper_side;
        }
      }
      if (r < 0) {
        if (++refactor_failures > kMaxRefactorFailures) fail(ErrorKind::Numerical, "primal ratio test failed");
        refactor();
        compute_primal();
        continue;
      }
      x[q] += dir * step;
      for (int i = 0; i < m; ++i) x[head[i]] -= dir * step * alpha_col[i];
      basis_change(r, q, target, to_upper);
      degenerate = step <= 1e-12 ? degenerate + 1 : 0;
      ++iters;
      if (!phase1 && trace) trace->push_back(objective_value());
    }
  }

  // ------------------------------------------------------------------ dual

  // Flips boxed nonbasics to restore dual feasibility; false if impossible.
  bool restore_dual_feasibility() {
    bool changed = false;
    for (int j = 0; j < total; ++j) {
      const VarStatus s = status[j];
      if (s == VarStatus::Basic || lo[j] == up[j]) continue;
      if (s == VarStatus::AtLower && d[j] < -opt.dual_tol) {
        if (!std::isfinite(up[j])) return false;
        status[j] = VarStatus::AtUpper;
        changed = true;
      } else if (s == VarStatus::AtUpper && d[j] > opt.dual_tol) {
        if (!std::isfinite(lo[j])) return false;
        status[j] = VarStatus::AtLower;
        changed = true;
      } else if (s == VarStatus::AtZero && std::abs(d[j]) > opt.dual_tol) {
        return false;
      }
    }
    if (changed) primal_dirty = true;
    return true;
  }

  Outcome dual() {
    compute_duals(false);
    if (!restore_dual_feasibility()) return Outcome::NeedPrimal;
    compute_primal();
    int degenerate = 0;
    int refactor_failures = 0;
    bool confirmed = false;
    long since_check = 0;
    int last_row = -1;
    rejected.clear();
    // The dual objective never decreases; a long run without progress is a cycle.
    const long stall_limit = std::max<long>(500, 5L * total);
    double best_obj = -kInf;
    long best_iter = iters;
    for (;;) {
      if (iters >= iter_cap) return Outcome::IterationLimit;
      if (iters - best_iter >= stall_limit) {
        const double obj = objective_value();
        if (obj <= best_obj + 1e-9 * (1.0 + std::abs(best_obj))) return Outcome::Stalled;
        best_obj = obj;
        best_iter = iters;
      }
      if (factor.updates() >= opt.refactor_interval) {
        refactor();
        compute_primal();
        compute_duals(false);
        if (!restore_dual_feasibility()) return Outcome::NeedPrimal;
        if (primal_dirty) compute_primal();
      }
      if (std::isfinite(cutoff) && ++since_check >= 8) {
        since_check = 0;
        if (objective_value() > cutoff) return Outcome::Cutoff;
      }
      const bool bland = degenerate > opt.degenerate_limit;
      int r = -1;
      double worst = opt.primal_tol;
      for (int i = 0; i < m; ++i) {
        const double inf = infeasibility(head[i]);
        if (inf <= opt.primal_tol) continue;
        if (bland) {
          if (r < 0 || head[i] < head[r]) r = i;
        } else if (inf > worst) {
          worst = inf;
          r = i;
        }
      }
      if (r < 0) {
        if (!confirmed) {
          refactor();
          compute_primal();
          compute_duals(false);
          if (!restore_dual_feasibility()) return Outcome::NeedPrimal;
          if (primal_dirty) compute_primal();
          confirmed = true;
          continue;
        }
        return Outcome::Optimal;
      }
      confirmed = false;
      const int leaving = head[r];
      const bool below = x[leaving] < lo[leaving];
      const double target = below ? lo[leaving] : up[leaving];
      const double sgn = below ? 1.0 : -1.0;

      if (r != last_row) rejected.clear();
      last_row = r;
      compute_pivot_row(r);
      for (int j : rejected) alpha_row[j] = 0.0;

      double theta_max = kInf;
      for (int j : touched) {
        const double a = alpha_row[j];
        if (std::abs(a) <= kPivotTol || lo[j] == up[j]) continue;
        const VarStatus s = status[j];
        double dj;
        if (s == VarStatus::AtLower) {
          if (a * sgn >= 0.0) continue;
          dj = std::max(d[j], 0.0);
        } else if (s == VarStatus::AtUpper) {
          if (a * sgn <= 0.0) continue;
          dj = std::max(-d[j], 0.0);
        } else {
          dj = std::abs(d[j]);
        }
        theta_max = std::min(theta_max, (dj + opt.dual_tol) / std::abs(a));
      }
      int q = -1;
      double best_abs = 0.0;
      for (int j : touched) {
        const double a = alpha_row[j];
        if (std::abs(a) <= kPivotTol || lo[j] == up[j]) continue;
        const VarStatus s = status[j];
        double dj;
        if (s == VarStatus::AtLower) {
          if (a * sgn >= 0.0) continue;
          dj = std::max(d[j], 0.0);
        } else if (s == VarStatus::AtUpper) {
          if (a * sgn <= 0.0) continue;
          dj = std::max(-d[j], 0.0);
        } else {
          dj = std::abs(d[j]);
        }
        if (dj / std::abs(a) > theta_max) continue;
        const bool better = bland ? (q < 0 || j < q) : std::abs(a) > best_abs;
        if (better) {
          best_abs = std::abs(a);
          q = j;
        }
      }
      if (q < 0) {
        if (!confirmed && refactor_failures <= kMaxRefactorFailures) {
          ++refactor_failures;
          refactor();
          compute_primal();
          compute_duals(false);
          if (!restore_dual_feasibility()) return Outcome::NeedPrimal;
          if (primal_dirty) compute_primal();
          confirmed = true;
          continue;
        }
        return Outcome::Infeasible;
      }

      load_column(q);
      const double piv = alpha_col[r];
      if (std::abs(piv - alpha_row[q]) > 1e-7 * (1.0 + std::abs(piv)) || std::abs(piv) <= kPivotTol) {
        if (factor.updates() == 0) {
          // Fresh factorization still disagrees: the candidate is numerically unusable.
          rejected.push_back(q);
          alpha_row[q] = 0.0;
          continue;
        }
        if (++refactor_failures > kMaxRefactorFailures) fail(ErrorKind::Numerical, "dual simplex pivot mismatch");
        refactor();
        compute_primal();
        compute_duals(false);
        if (!restore_dual_feasibility()) return Outcome::NeedPrimal;
        if (primal_dirty) compute_primal();
        continue;
      }
      const double t = (x[leaving] - target) / piv;
      x[q] += t;
      for (int i = 0; i < m; ++i) x[head[i]] -= t * alpha_col[i];

      const double theta = d[q] / alpha_row[q];
      for (int j : touched) d[j] -= theta * alpha_row[j];
      d[q] = 0.0;
      d[leaving] = -theta;
      basis_change(r, q, target, !below);
      rejected.clear();
      last_row = -1;
      degenerate = std::abs(theta) <= 1e-12 ? degenerate + 1 : 0;
      ++iters;
    }
  }

  LpStatus run(long limit) {
    iter_cap = iters + limit;
    if (m == 0) return solve_unconstrained();
    if (!has_basis) cold_basis();
    refactor();
    compute_primal();
    Outcome out = dual();
    if (out == Outcome::Stalled) {
      // Restart from the slack basis; the primal path does not share the cycle.
      cold_basis();
      refactor();
      compute_primal();
      out = Outcome::NeedPrimal;
    }
    if (out == Outcome::NeedPrimal) {
      out = primal();
      if (out == Outcome::Stalled) {
        cold_basis();
        refactor();
        compute_primal();
        out = primal();
      }
      if (out == Outcome::Optimal) {
        // Primal optimum may carry tiny dual infeasibilities from Harris steps.
        compute_duals(false);
      }
    } else if (out == Outcome::Optimal) {
      compute_duals(false);
      bool dual_ok = true;
      for (int j = 0; j < total && dual_ok; ++j) {
        if (status[j] == VarStatus::Basic || lo[j] == up[j]) continue;
        if (status[j] == VarStatus::AtLower && d[j] < -10 * opt.dual_tol) dual_ok = false;
        if (status[j] == VarStatus::AtUpper && d[j] > 10 * opt.dual_tol) dual_ok = false;
        if (status[j] == VarStatus::AtZero && std::abs(d[j]) > 10 * opt.dual_tol) dual_ok = false;
      }
      if (!dual_ok) out = primal();
    }
    switch (out) {
      case Outcome::Optimal: return LpStatus::Optimal;
      case Outcome::Infeasible: return LpStatus::Infeasible;
      case Outcome::Unbounded: return LpStatus::Unbounded;
      case Outcome::Cutoff: return LpStatus::Cutoff;
      default: return LpStatus::IterationLimit;
    }
  }

  LpStatus solve_unconstrained() {
    for (int j = 0; j < n; ++j) {
      if (cost[j] > 0.0 && !std::isfinite(lo[j])) return LpStatus::Unbounded;
      if (cost[j] < 0.0 && !std::isfinite(up[j])) return LpStatus::Unbounded;
      status[j] = preferred_status(j);
      x[j] = nonbasic_value(j);
      d[j] = cost[j];
    }
    has_basis = true;
    return LpStatus::Optimal;
  }
};

LpEngine::LpEngine(const Model& model, LpOptions options) : impl_(std::make_unique<Impl>(model, options)) {}
LpEngine::~LpEngine() = default;

int LpEngine::num_cols() const { return impl_->n; }
int LpEngine::num_rows() const { return impl_->m; }

void LpEngine::set_col_bounds(int col, double lower, double upper) {
  Impl& s = *impl_;
  s.lo[col] = lower / s.col_scale[col];
  s.up[col] = upper / s.col_scale[col];
  VarStatus& st = s.status[col];
  if (st == VarStatus::Basic) return;
  const bool has_lo = std::isfinite(s.lo[col]), has_up = std::isfinite(s.up[col]);
  if (st == VarStatus::AtLower && !has_lo) st = has_up ? VarStatus::AtUpper : VarStatus::AtZero;
  if (st == VarStatus::AtUpper && !has_up) st = has_lo ? VarStatus::AtLower : VarStatus::AtZero;
  if (st == VarStatus::AtZero && (has_lo || has_up)) st = has_lo ? VarStatus::AtLower : VarStatus::AtUpper;
  s.x[col] = s.nonbasic_value(col);
  s.primal_dirty = true;
}

double LpEngine::col_lower(int col) const { return impl_->lo[col] * impl_->col_scale[col]; }
double LpEngine::col_upper(int col) const { return impl_->up[col] * impl_->col_scale[col]; }
void LpEngine::set_cutoff(double value) { impl_->cutoff = value; }
LpStatus LpEngine::solve() { return impl_->run(impl_->opt.iteration_limit); }
LpStatus LpEngine::solve(long iteration_limit) { return impl_->run(iteration_limit); }
double LpEngine::objective() const { return impl_->objective_value(); }

std::vector<double> LpEngine::primal() const {
  std::vector<double> v(impl_->n);
  for (int j = 0; j < impl_->n; ++j) v[j] = impl_->x[j] * impl_->col_scale[j];
  return v;
}

std::vector<double> LpEngine::row_duals() const {
  std::vector<double> v(impl_->m);
  for (int i = 0; i < impl_->m; ++i) v[i] = impl_->y[i] * impl_->row_scale[i];
  return v;
}

std::vector<double> LpEngine::reduced_costs() const {
  std::vector<double> v(impl_->n);
  for (int j = 0; j < impl_->n; ++j) v[j] = impl_->d[j] / impl_->col_scale[j];
  return v;
}

Basis LpEngine::basis() const { return Basis{impl_->status}; }

void LpEngine::set_basis(const Basis& basis) {
  Impl& s = *impl_;
  if (static_cast<int>(basis.status.size()) != s.total) fail(ErrorKind::Validation, "basis size mismatch");
  int basic = 0;
  for (VarStatus st : basis.status) basic += st == VarStatus::Basic;
  if (basic != s.m) {
    s.has_basis = false;
    return;
  }
  s.status = basis.status;
  int k = 0;
  for (int j = 0; j < s.total; ++j) {
    if (s.status[j] == VarStatus::Basic) {
      s.head[k] = j;
      s.pos[j] = k++;
    } else {
      s.pos[j] = -1;
      const bool has_lo = std::isfinite(s.lo[j]), has_up = std::isfinite(s.up[j]);
      VarStatus& st = s.status[j];
      if (st == VarStatus::AtLower && !has_lo) st = has_up ? VarStatus::AtUpper : VarStatus::AtZero;
      if (st == VarStatus::AtUpper && !has_up) st = has_lo ? VarStatus::AtLower : VarStatus::AtZero;
      if (st == VarStatus::AtZero && (has_lo || has_up)) st = has_lo ? VarStatus::AtLower : VarStatus::AtUpper;
      s.x[j] = s.nonbasic_value(j);
    }
  }
  s.has_basis = true;
  s.primal_dirty = true;
}

long LpEngine::iterations() const { return impl_->iters; }
void LpEngine::set_objective_trace(std::vector<double>* trace) { impl_->trace = trace; }

Solution solve_lp(const Model& model, const LpOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  LpEngine engine(model, options);
  const LpStatus st = engine.solve();
  Solution sol;
  switch (st) {
    case LpStatus::Optimal: sol.status = SolveStatus::Optimal; break;
    case LpStatus::Infeasible: sol.status = SolveStatus::Infeasible; break;
    case LpStatus::Unbounded: sol.status = SolveStatus::Unbounded; break;
    default: sol.status = SolveStatus::IterationLimit; break;
  }
  if (sol.status == SolveStatus::Optimal) {
    sol.values = engine.primal();
    sol.objective = model.objective_value(sol.values);
    sol.best_bound = sol.objective;
    sol.row_duals = engine.row_duals();
    sol.reduced_costs = engine.reduced_costs();
  }
  sol.lp_iterations = engine.iterations();
  sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace ptcoord::milp
