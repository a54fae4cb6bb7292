#include "ptcoord/dispatch.hpp"

#include <algorithm>
#include <cmath>

#include "ptcoord/error.hpp"
#include "ptcoord/milp/simplex.hpp"

namespace ptcoord {

namespace {

struct Unit {
  std::string name;
  int bus = 0;  // bus id
  Generator curve;
};

std::vector<Unit> units_of(const CoupledInstance& inst) {
  std::vector<Unit> units;
  for (const Generator& g : inst.generators) units.push_back({"gen" + std::to_string(g.id), g.bus, g});
  Generator sub;
  sub.id = 0;
  sub.bus = inst.substation.bus;
  sub.b = inst.substation.price;
  sub.p_min = inst.substation.import_min;
  sub.p_max = inst.substation.import_max;
  units.push_back({"sub", inst.substation.bus, sub});
  return units;
}

double quad(const Generator& g, double p) { return (g.a * p + g.b) * p + g.c; }

}  // namespace

std::vector<CostSegment> cost_pwl(const Generator& gen, int segments) {
  if (segments < 1) fail(ErrorKind::Validation, "cost curve needs at least one segment");
  if (gen.a < 0.0) fail(ErrorKind::Validation, "generator " + std::to_string(gen.id) + ": negative quadratic coefficient");
  if (gen.p_max <= gen.p_min) return {{0.0, quad(gen, gen.p_min)}};
  if (gen.a == 0.0) return {{gen.b, gen.c}};
  std::vector<CostSegment> segs;
  const double w = (gen.p_max - gen.p_min) / segments;
  for (int j = 0; j < segments; ++j) {
    const double lo = gen.p_min + j * w;
    const double hi = j + 1 == segments ? gen.p_max : lo + w;
    const double k = (quad(gen, hi) - quad(gen, lo)) / (hi - lo);
    segs.push_back({k, quad(gen, lo) - k * lo});
  }
  return segs;
}

DispatchLp assemble_dispatch_lp(const CoupledInstance& inst, const std::vector<double>& charging_loads) {
  if (charging_loads.size() != inst.evcs.size())
    fail(ErrorKind::Validation, "dispatch: one charging load per EVCS is required");
  for (double l : charging_loads)
    if (!(l >= 0.0)) fail(ErrorKind::Validation, "dispatch: charging loads must be nonnegative");

  DispatchLp d;
  d.loads = charging_loads;
  CanonicalLp& lp = d.lp;
  lp.num_params = static_cast<int>(inst.evcs.size());
  const double B = inst.params.dual_price_bound;
  const double S = inst.params.power_base;
  d.angle_scale = S;
  const std::vector<Unit> units = units_of(inst);
  d.reference_bus = inst.bus_index(inst.substation.bus);

  std::vector<std::vector<CostSegment>> segs;
  for (const Unit& u : units) segs.push_back(cost_pwl(u.curve, u.curve.a == 0.0 ? 1 : inst.params.cost_segments));

  // Range of each epigraph value at an optimum: the interpolant over [p_min, p_max].
  std::vector<std::pair<double, double>> cost_range;
  for (std::size_t k = 0; k < units.size(); ++k) {
    const Generator& g = units[k].curve;
    double lo = CanonicalLp::kInf, hi = -CanonicalLp::kInf;
    const int n = static_cast<int>(segs[k].size());
    for (int j = 0; j <= n; ++j) {
      const double p = g.p_max <= g.p_min ? g.p_min : g.p_min + (g.p_max - g.p_min) * j / n;
      double v = -CanonicalLp::kInf;
      for (const CostSegment& s : segs[k]) v = std::max(v, s.slope * p + s.intercept);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    cost_range.emplace_back(lo, hi);
  }

  double eta_lo = 0.0, eta_hi = 0.0;
  for (auto [lo, hi] : cost_range) {
    eta_lo += lo;
    eta_hi += hi;
  }
  CanonicalLp::Column eta{"eta", 1.0};
  eta.implied_lower = eta_lo;
  eta.implied_upper = eta_hi;
  d.eta = lp.add_col(eta);
  for (std::size_t k = 0; k < units.size(); ++k) {
    CanonicalLp::Column c{"F_" + units[k].name, 0.0};
    c.implied_lower = cost_range[k].first;
    c.implied_upper = cost_range[k].second;
    d.unit_cost.push_back(lp.add_col(c));
  }
  for (const Unit& u : units) {
    CanonicalLp::Column c{"P_" + u.name, 0.0, u.curve.p_min, u.curve.p_max};
    c.bound_dual_limit = 4.0 * B;
    d.unit_output.push_back(lp.add_col(c));
    d.unit_bus.push_back(inst.bus_index(u.bus));
  }
  for (const Line& l : inst.lines) {
    CanonicalLp::Column c{"Pl_" + std::to_string(l.id), 0.0, -l.flow_limit, l.flow_limit};
    c.bound_dual_limit = 4.0 * B;
    d.line_flow.push_back(lp.add_col(c));
  }
  for (std::size_t b = 0; b < inst.buses.size(); ++b) {
    const Bus& bus = inst.buses[b];
    CanonicalLp::Column c{"theta_" + std::to_string(bus.id), 0.0, S * bus.angle_min, S * bus.angle_max};
    c.bound_dual_limit = 4.0 * B;
    if (static_cast<int>(b) == d.reference_bus) {
      c.lower = c.upper = 0.0;
      c.bound_dual_limit = 40.0 * B;
    }
    d.bus_angle.push_back(lp.add_col(c));
  }
  for (CanonicalLp::Column& c : lp.cols) {
    if (!std::isfinite(c.implied_lower)) c.implied_lower = c.lower;
    if (!std::isfinite(c.implied_upper)) c.implied_upper = c.upper;
  }

  // eta - sum F = 0; its multiplier is pinned at -1 by stationarity of eta.
  CanonicalLp::Row def;
  def.name = "eta_def";
  def.terms.push_back({d.eta, 1.0});
  for (int f : d.unit_cost) def.terms.push_back({f, -1.0});
  def.dual_limit = 2.0;
  d.eta_row = static_cast<int>(lp.equalities.size());
  lp.equalities.push_back(def);

  for (std::size_t b = 0; b < inst.buses.size(); ++b) {
    const Bus& bus = inst.buses[b];
    CanonicalLp::Row r;
    r.name = "balance_" + std::to_string(bus.id);
    for (std::size_t k = 0; k < units.size(); ++k)
      if (d.unit_bus[k] == static_cast<int>(b)) r.terms.push_back({d.unit_output[k], 1.0});
    for (std::size_t l = 0; l < inst.lines.size(); ++l) {
      if (inst.lines[l].from == bus.id) r.terms.push_back({d.line_flow[l], -1.0});
      if (inst.lines[l].to == bus.id) r.terms.push_back({d.line_flow[l], 1.0});
    }
    r.rhs = bus.demand;
    for (std::size_t m = 0; m < inst.evcs.size(); ++m)
      if (inst.evcs[m].bus == bus.id) r.rhs_params.push_back({static_cast<int>(m), 1.0});
    r.dual_limit = 20.0 * B;
    d.bus_row.push_back(static_cast<int>(lp.equalities.size()));
    lp.equalities.push_back(std::move(r));
  }
  for (std::size_t l = 0; l < inst.lines.size(); ++l) {
    const Line& line = inst.lines[l];
    CanonicalLp::Row r;
    r.name = "dc_" + std::to_string(line.id);
    r.terms = {{d.line_flow[l], line.reactance},
               {d.bus_angle[inst.bus_index(line.from)], -1.0},
               {d.bus_angle[inst.bus_index(line.to)], 1.0}};
    r.dual_limit = 20.0 * B;
    d.line_row.push_back(static_cast<int>(lp.equalities.size()));
    lp.equalities.push_back(std::move(r));
  }
  d.unit_support_rows.resize(units.size());
  for (std::size_t k = 0; k < units.size(); ++k) {
    for (std::size_t j = 0; j < segs[k].size(); ++j) {
      // slope * P - F <= -intercept
      CanonicalLp::Row r;
      r.name = "support_" + units[k].name + "_" + std::to_string(j + 1);
      r.terms = {{d.unit_cost[k], -1.0}};
      if (segs[k][j].slope != 0.0) r.terms.insert(r.terms.begin(), {d.unit_output[k], segs[k][j].slope});
      std::sort(r.terms.begin(), r.terms.end(), [](const milp::Term& a, const milp::Term& b) { return a.var < b.var; });
      r.rhs = -segs[k][j].intercept;
      r.dual_limit = 1.0;
      d.unit_support_rows[k].push_back(static_cast<int>(lp.inequalities.size()));
      lp.inequalities.push_back(std::move(r));
    }
  }
  return d;
}

DispatchDecision extract_dispatch(const DispatchLp& d, const std::vector<double>& x, const std::vector<int>& offset) {
  auto at = [&](int col) { return x[offset.empty() ? col : offset[col]]; };
  DispatchDecision dec;
  dec.eta = at(d.eta);
  for (int k = 0; k < d.num_units(); ++k) {
    dec.output.push_back(at(d.unit_output[k]));
    dec.cost.push_back(at(d.unit_cost[k]));
  }
  for (int c : d.line_flow) dec.line_flow.push_back(at(c));
  for (int c : d.bus_angle) dec.angle.push_back(at(c) / d.angle_scale);
  return dec;
}

DispatchSolve solve_dispatch(const DispatchLp& d) {
  const milp::Model model = d.lp.to_model(d.loads);
  const milp::Solution sol = milp::solve_lp(model);
  DispatchSolve out;
  out.status = sol.status;
  out.iterations = sol.lp_iterations;
  if (sol.status == milp::SolveStatus::Optimal) out.decision = extract_dispatch(d, sol.values, {});
  return out;
}

DispatchResiduals dispatch_residuals(const CoupledInstance& inst, const std::vector<double>& loads,
                                     const DispatchDecision& dec) {
  DispatchResiduals r;
  const std::vector<Unit> units = units_of(inst);
  const double S = inst.params.power_base;
  for (const Bus& bus : inst.buses) {
    double net = -bus.demand;
    for (std::size_t k = 0; k < units.size(); ++k)
      if (units[k].bus == bus.id) net += dec.output[k];
    for (std::size_t l = 0; l < inst.lines.size(); ++l) {
      if (inst.lines[l].from == bus.id) net -= dec.line_flow[l];
      if (inst.lines[l].to == bus.id) net += dec.line_flow[l];
    }
    for (std::size_t m = 0; m < inst.evcs.size(); ++m)
      if (inst.evcs[m].bus == bus.id) net -= loads[m];
    r.bus_balance = std::max(r.bus_balance, std::abs(net));
  }
  for (std::size_t l = 0; l < inst.lines.size(); ++l) {
    const Line& line = inst.lines[l];
    const double dtheta = dec.angle[inst.bus_index(line.from)] - dec.angle[inst.bus_index(line.to)];
    r.dc_law = std::max(r.dc_law, std::abs(line.reactance * dec.line_flow[l] - S * dtheta));
    r.bounds = std::max(r.bounds, std::abs(dec.line_flow[l]) - line.flow_limit);
  }
  for (std::size_t b = 0; b < inst.buses.size(); ++b) {
    r.bounds = std::max(r.bounds, inst.buses[b].angle_min - dec.angle[b]);
    r.bounds = std::max(r.bounds, dec.angle[b] - inst.buses[b].angle_max);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < units.size(); ++k) {
    const Generator& g = units[k].curve;
    r.bounds = std::max({r.bounds, g.p_min - dec.output[k], dec.output[k] - g.p_max});
    double support = -CanonicalLp::kInf;
    for (const CostSegment& s : cost_pwl(g, g.a == 0.0 ? 1 : inst.params.cost_segments))
      support = std::max(support, s.slope * dec.output[k] + s.intercept);
    r.epigraph = std::max(r.epigraph, std::abs(dec.cost[k] - support));
    total += dec.cost[k];
  }
  r.eta_sum = std::abs(dec.eta - total);
  return r;
}

}  // namespace ptcoord
