#include "ptcoord/mechanism.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ptcoord/error.hpp"

namespace ptcoord {

using milp::LinExpr;
using milp::SolveStatus;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

bool fill_order_ok(const UeBlock& ue, const std::vector<double>& x, double tol) {
  for (const FillOrder& f : ue.road_fill)
    if (!fill_order_holds(f, x, tol)) return false;
  for (const FillOrder& f : ue.station_fill)
    if (!fill_order_holds(f, x, tol)) return false;
  return true;
}

constexpr double kFillTol = 1e-6;

}  // namespace

PreScheduleModel assemble_pre_schedule(const CoupledInstance& inst, const PathSet& ps, double m_scale) {
  PreScheduleModel pm;
  pm.ue = assemble_ue_block(pm.model, inst, ps, UeOptions{m_scale});
  pm.model.set_objective(pm.ue.gamma);
  return pm;
}

PreScheduleResult pre_schedule(const CoupledInstance& inst, const PathSet& ps, const MechanismOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  PreScheduleResult r;
  double m_scale = 1.0;
  for (int attempt = 0; attempt < 2; ++attempt) {
    PreScheduleModel pm = assemble_pre_schedule(inst, ps, m_scale);
    r.milp = milp::solve_milp(pm.model, opt.milp);
    if (r.milp.status == SolveStatus::Infeasible) {
      std::string who;
      for (int o : overloaded_od_pairs(inst, ps)) who += (who.empty() ? "" : ", ") + std::to_string(inst.od_pairs[o].id);
      fail(ErrorKind::Infeasible, who.empty()
                                      ? "pre-schedule: traffic demand of the O-D pairs jointly exceeds network capacity"
                                      : "pre-schedule: demand of od_pair " + who + " exceeds network capacity");
    }
    if (!r.milp.has_point())
      fail(ErrorKind::SolverLimit, "pre-schedule: no equilibrium found within the node limit");
    r.big_m = audit_big_m(r.milp.values, pm.ue.pairs);
    r.m_scale = m_scale;
    r.traffic = extract_traffic(inst, ps, pm.ue, r.milp.values);
    r.fill_order_ok = fill_order_ok(pm.ue, r.milp.values, kFillTol);
    if (r.big_m.clean()) break;
    m_scale *= opt.m_retry_scale;
  }
  r.gamma0 = r.traffic.gamma;
  r.wardrop = verify_wardrop(inst, ps, r.traffic, opt.wardrop_tol_rel * std::max(1.0, r.gamma0));
  r.loads = r.traffic.charging_load;

  const DispatchLp lp = assemble_dispatch_lp(inst, r.loads);
  const DispatchSolve ds = solve_dispatch(lp);
  if (ds.status != SolveStatus::Optimal)
    fail(ErrorKind::Infeasible, std::string("pre-schedule: dispatch ") + milp::to_string(ds.status));
  r.dispatch = ds.decision;
  r.eta0 = ds.decision.eta;
  r.seconds = seconds_since(start);
  return r;
}

void account(SweepPoint& p, double gamma0, double eta0) {
  const double a = p.alpha;
  p.delta_eta = eta0 - p.eta;
  p.delta_gamma = p.gamma - gamma0;
  p.psi = p.eta + a * p.delta_eta;
  p.h = p.gamma - a * p.delta_eta;
  p.overall = p.psi + p.h;
  p.tn_net_profit = a * p.delta_eta - p.delta_gamma;
  p.pdn_net_profit = (1.0 - a) * p.delta_eta;
}

SweepPoint re_schedule(const CoupledInstance& inst, const PathSet& ps, double alpha, const PreScheduleResult& pre,
                       const MechanismOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  SweepPoint pt;
  pt.alpha = alpha;
  double m_scale = 1.0;
  SingleLevel sl;
  milp::Solution sol;
  for (int attempt = 0; attempt < 2; ++attempt) {
    sl = assemble_single_level(inst, ps, alpha, pre.eta0, SingleLevelOptions{m_scale});
    sol = milp::solve_milp(sl.model, opt.milp);
    pt.nodes += sol.nodes;
    if (sol.has_point() && alpha == 0.0 && opt.lexicographic_zero) {
      // Among Gamma-optimal equilibria keep the cheapest dispatch; the
      // baseline strategy stays feasible so eta cannot exceed eta0.
      const double cap = std::max(sl.ue.gamma.evaluate(sol.values), pre.gamma0) + 1e-9 * std::max(1.0, pre.gamma0);
      milp::Model lex = sl.model;
      lex.add_constraint("gamma_cap", sl.ue.gamma, milp::RowSense::LessEqual, cap);
      lex.set_objective(LinExpr::var(sl.eta_var()));
      milp::Solution second = milp::solve_milp(lex, opt.milp);
      pt.nodes += second.nodes;
      if (second.has_point()) {
        second.objective = sl.model.objective_value(second.values);
        if (second.status != SolveStatus::Optimal) sol.status = second.status;
        sol.values = std::move(second.values);
        sol.objective = second.objective;
        sol.gap = std::max(sol.gap, second.gap);
        pt.lexicographic = true;
      } else {
        pt.note = "lexicographic stage failed; first-stage point kept";
      }
    }
    if (!sol.has_point()) break;
    pt.big_m = audit_big_m(sol.values, sl.all_pairs());
    pt.m_scale = m_scale;
    if (pt.big_m.clean()) break;
    m_scale *= opt.m_retry_scale;
  }
  pt.status = sol.status;
  pt.gap = sol.gap;
  if (!sol.has_point()) {
    pt.wall_seconds = seconds_since(start);
    if (pt.note.empty()) pt.note = std::string("no solution: ") + milp::to_string(sol.status);
    return pt;
  }

  const std::vector<double>& x = sol.values;
  pt.traffic = extract_traffic(inst, ps, sl.ue, x);
  pt.dispatch = extract_dispatch(sl.dispatch, x, sl.emb.primal);
  pt.loads = pt.traffic.charging_load;
  pt.gamma = pt.traffic.gamma;
  pt.eta = x[sl.eta_var()];
  account(pt, pre.gamma0, pre.eta0);

  pt.wardrop = verify_wardrop(inst, ps, pt.traffic, opt.wardrop_tol_rel * std::max(1.0, pt.gamma));
  pt.fill_order_ok = fill_order_ok(sl.ue, x, kFillTol);
  pt.kkt = audit_kkt(sl.dispatch.lp, sl.kkt, sl.emb.primal_values(x), sl.emb.dual_values(x), pt.loads);

  DispatchLp oracle = assemble_dispatch_lp(inst, pt.loads);
  const DispatchSolve ds = solve_dispatch(oracle);
  if (ds.status == SolveStatus::Optimal) {
    pt.eta_oracle = ds.decision.eta;
    pt.oracle_rel_diff = std::abs(pt.eta - pt.eta_oracle) / std::max(1.0, std::abs(pt.eta_oracle));
  } else {
    pt.oracle_rel_diff = std::numeric_limits<double>::infinity();
    pt.note = "dispatch oracle " + std::string(milp::to_string(ds.status));
  }

  std::vector<std::string> issues;
  if (pt.status != SolveStatus::Optimal) issues.push_back(milp::to_string(pt.status));
  if (!pt.wardrop.ok()) issues.push_back("wardrop");
  if (!pt.big_m.clean()) issues.push_back("big-M audit");
  if (!pt.fill_order_ok) issues.push_back("fill order");
  if (pt.oracle_rel_diff > 1e-5) issues.push_back("dispatch oracle");
  if (pt.kkt.duality_gap_rel > 1e-5) issues.push_back("strong duality");
  pt.accepted = issues.empty();
  for (const std::string& s : issues) pt.note += (pt.note.empty() ? "" : "; ") + s;
  pt.wall_seconds = seconds_since(start);
  return pt;
}

void check_alpha_grid(const std::vector<double>& grid) {
  if (grid.empty()) fail(ErrorKind::Validation, "sharing-ratio grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) fail(ErrorKind::Validation, "sharing ratio outside [0,1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) fail(ErrorKind::Validation, "sharing-ratio grid must be sorted and distinct");
  }
}

std::vector<double> make_alpha_grid(double first, double last, double step) {
  if (!(step > 0.0)) fail(ErrorKind::Validation, "grid step must be positive");
  if (!(first <= last)) fail(ErrorKind::Validation, "grid start exceeds grid end");
  std::vector<double> grid;
  const long n = static_cast<long>(std::floor((last - first) / step + 1e-9));
  for (long i = 0; i <= n; ++i) grid.push_back(std::round((first + i * step) * 1e10) / 1e10);
  check_alpha_grid(grid);
  return grid;
}

SweepResult sweep(const CoupledInstance& inst, const PathSet& ps, const std::vector<double>& grid,
                  const MechanismOptions& opt, const SweepProgress& progress) {
  check_alpha_grid(grid);
  SweepResult res;
  res.pre = pre_schedule(inst, ps, opt);
  for (double a : grid) {
    SweepPoint p;
    try {
      p = re_schedule(inst, ps, a, res.pre, opt);
    } catch (const Error& e) {
      p.alpha = a;
      p.note = e.what();
    }
    if (progress) progress(p);
    res.points.push_back(std::move(p));
  }
  return res;
}

std::size_t select_alpha_star(const std::vector<SweepPoint>& points) {
  std::size_t best = points.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].accepted) continue;
    if (best == points.size()) {
      best = i;
      continue;
    }
    const double ref = points[best].psi;
    if (points[i].psi < ref - 1e-9 * std::max(1.0, std::abs(ref))) best = i;
    else if (std::abs(points[i].psi - ref) <= 1e-9 * std::max(1.0, std::abs(ref)) && points[i].alpha < points[best].alpha)
      best = i;
  }
  if (best == points.size()) fail(ErrorKind::SolverLimit, "no optimal sweep point to select a sharing ratio from");
  return best;
}

Diagnostics diagnostics(const std::vector<SweepPoint>& points, int local_units, double generation_tol) {
  Diagnostics d;
  std::vector<const SweepPoint*> ok;
  for (const SweepPoint& p : points)
    if (p.accepted) ok.push_back(&p);
  const int n = static_cast<int>(ok.size());
  for (const SweepPoint* p : ok)
    if (p->delta_eta > 1e-6 * std::max(1.0, std::abs(p->eta + p->delta_eta))) ++d.strict_savings;

  for (int i = 0; i + 1 < n; ++i) {
    const double ref = ok[i]->delta_eta;
    bool flat = true;
    for (int j = i + 1; j < n && flat; ++j)
      flat = std::abs(ok[j]->delta_eta - ref) < 1e-3 * std::max(1.0, std::abs(ref));
    if (flat) {
      d.plateau_index = static_cast<int>(ok[i] - points.data());
      d.plateau_alpha = ok[i]->alpha;
      d.max_local_generation = 0.0;
      for (int j = i; j < n; ++j)
        for (int k = 0; k < local_units && k < static_cast<int>(ok[j]->dispatch.output.size()); ++k)
          d.max_local_generation = std::max(d.max_local_generation, ok[j]->dispatch.output[k]);
      d.local_generation_zero = d.max_local_generation <= generation_tol;
      break;
    }
  }
  const int stop = d.plateau_index >= 0 ? d.plateau_index : static_cast<int>(points.size()) - 1;
  const SweepPoint* prev = nullptr;
  for (int i = 0; i <= stop && i < static_cast<int>(points.size()); ++i) {
    if (!points[i].accepted) continue;
    if (prev && points[i].overall > prev->overall + 1e-6 * std::max(1.0, std::abs(prev->overall)))
      d.overall_nonincreasing = false;
    prev = &points[i];
  }
  return d;
}

}  // namespace ptcoord
