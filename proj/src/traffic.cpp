#include "ptcoord/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ptcoord/error.hpp"
#include "ptcoord/milp/simplex.hpp"

namespace ptcoord {

using milp::LinExpr;
using milp::RowSense;

double bpr_time(double x, const Road& road) {
  if (x < 0.0) fail(ErrorKind::Domain, "road " + std::to_string(road.id) + ": negative flow");
  const double r = x / road.capacity;
  return road.free_flow_time * (1.0 + 0.15 * r * r * r * r);
}

double davidson_time(double y, const Evcs& station, const GlobalParams& params) {
  if (y < 0.0) fail(ErrorKind::Domain, "evcs " + std::to_string(station.id) + ": negative flow");
  if (y > params.davidson_fraction * station.capacity)
    fail(ErrorKind::Domain, "evcs " + std::to_string(station.id) + ": flow beyond the queue domain bound");
  return station.base_service_time * (1.0 + params.davidson_j * y / (station.capacity - y));
}

std::vector<double> charging_load(const std::vector<double>& y, const GlobalParams& params) {
  std::vector<double> p;
  p.reserve(y.size());
  for (double v : y) {
    if (v < 0.0) fail(ErrorKind::Domain, "negative station flow");
    p.push_back(v * params.traffic_base * params.battery_energy / 1000.0);
  }
  return p;
}

double toll_bound(const CoupledInstance& inst, const PathSet& ps) {
  if (inst.params.toll_max) return *inst.params.toll_max;
  double longest = 0.0;
  for (const PathAlt& p : ps.paths) {
    double t = route_free_flow_time(inst, p.roads);
    if (p.evcs >= 0) t += inst.evcs[p.evcs].base_service_time;
    longest = std::max(longest, t);
  }
  return 10.0 * inst.params.time_value * longest;
}

UeBlock assemble_ue_block(milp::Model& model, const CoupledInstance& inst, const PathSet& ps, const UeOptions& opt) {
  const GlobalParams& gp = inst.params;
  const double omega = gp.time_value;
  const Incidence inc = build_incidence(inst, ps);
  UeBlock blk;
  blk.toll_max = toll_bound(inst, ps);

  auto class_demand = [&](int od, VehicleClass cls) {
    return cls == VehicleClass::Gv ? inst.od_pairs[od].gv_demand : inst.od_pairs[od].ev_demand;
  };

  for (const PathAlt& p : ps.paths)
    blk.path_flow.push_back(model.add_variable("f" + std::to_string(p.id + 1), 0.0, class_demand(p.od, p.cls)));

  for (std::size_t a = 0; a < inst.roads.size(); ++a) {
    const Road& road = inst.roads[a];
    const std::string pre = "road" + std::to_string(road.id);
    PwlCurve c = build_pwl([&](double x) { return bpr_time(x, road); }, road.capacity, gp.road_segments, road.id);
    FillOrder fo = encode_fill_order(model, c, pre);
    LinExpr link = fo.total();
    for (int p : inc.road_paths[a]) link.add(blk.path_flow[p], -1.0);
    model.add_constraint(pre + "_flow", link, RowSense::Equal, 0.0);
    blk.road_toll.push_back(model.add_variable(pre + "_toll", 0.0, blk.toll_max));
    blk.road_curve.push_back(std::move(c));
    blk.road_fill.push_back(std::move(fo));
  }

  for (std::size_t m = 0; m < inst.evcs.size(); ++m) {
    const Evcs& s = inst.evcs[m];
    const std::string pre = "evcs" + std::to_string(s.id);
    PwlCurve c = build_pwl([&](double y) { return davidson_time(y, s, gp); }, gp.davidson_fraction * s.capacity,
                           gp.road_segments, s.id);
    FillOrder fo = encode_fill_order(model, c, pre);
    LinExpr link = fo.total();
    LinExpr flow;
    for (int p : inc.station_paths[m]) {
      link.add(blk.path_flow[p], -1.0);
      flow.add(blk.path_flow[p], 1.0);
    }
    model.add_constraint(pre + "_flow", link, RowSense::Equal, 0.0);
    blk.station_fee.push_back(model.add_variable(pre + "_fee", 0.0, blk.toll_max));
    blk.station_load.push_back(inst.load_per_flow() * flow);
    blk.station_flow.push_back(std::move(flow));
    blk.station_curve.push_back(std::move(c));
    blk.station_fill.push_back(std::move(fo));
  }

  // Path costs: time valued at omega plus tolls, fees and the charging bill.
  for (const PathAlt& p : ps.paths) {
    LinExpr cost;
    for (int a : p.roads) {
      cost.add(omega * blk.road_fill[a].value(blk.road_curve[a]));
      cost.add(blk.road_toll[a], 1.0);
    }
    if (p.evcs >= 0) {
      cost.add(omega * blk.station_fill[p.evcs].value(blk.station_curve[p.evcs]));
      cost.add_constant(inst.evcs[p.evcs].charging_price * gp.battery_energy);
      cost.add(blk.station_fee[p.evcs], 1.0);
    }
    cost.normalize();
    blk.path_cost.push_back(std::move(cost));
  }

  blk.od_cost.assign(2 * inst.od_pairs.size(), -1);
  for (std::size_t k = 0; k < inc.od_class_paths.size(); ++k) {
    const auto& paths = inc.od_class_paths[k];
    if (paths.empty()) continue;
    double lo = std::numeric_limits<double>::infinity(), hi = lo;
    for (int p : paths) {
      const auto [clo, chi] = interval_bounds(blk.path_cost[p], model);
      lo = std::min(lo, clo);
      hi = std::min(hi, chi);
    }
    const int od = static_cast<int>(k / 2);
    const VehicleClass cls = k % 2 ? VehicleClass::Ev : VehicleClass::Gv;
    const std::string name = "od" + std::to_string(inst.od_pairs[od].id) + (k % 2 ? "_ev" : "_gv");
    blk.od_cost[k] = model.add_variable(name + "_cost", lo, hi);
    LinExpr demand;
    for (int p : paths) demand.add(blk.path_flow[p], 1.0);
    model.add_constraint(name + "_demand", demand, RowSense::Equal, class_demand(od, cls));
    blk.gamma.add(blk.od_cost[k], gp.traffic_base * class_demand(od, cls));
  }

  for (const PathAlt& p : ps.paths) {
    BigMPair pair;
    pair.name = "path" + std::to_string(p.id + 1) + "_eq";
    pair.f = LinExpr::var(blk.path_flow[p.id]);
    const int u = blk.od_cost[2 * p.od + (p.cls == VehicleClass::Ev ? 1 : 0)];
    pair.g = blk.path_cost[p.id] - LinExpr::var(u);
    big_m_linearize(model, pair, gp.big_m_safety, opt.m_scale);
    blk.pairs.push_back(std::move(pair));
  }
  return blk;
}

TrafficDecision extract_traffic(const CoupledInstance& inst, const PathSet& ps, const UeBlock& blk,
                                const std::vector<double>& x) {
  const GlobalParams& gp = inst.params;
  TrafficDecision d;
  const std::size_t na = inst.roads.size(), nm = inst.evcs.size();
  d.road_flow.assign(na, 0.0);
  d.road_flow_gv.assign(na, 0.0);
  d.road_flow_ev.assign(na, 0.0);
  d.station_flow.assign(nm, 0.0);
  for (const PathAlt& p : ps.paths) {
    const double f = std::max(0.0, x[blk.path_flow[p.id]]);
    d.path_flow.push_back(f);
    for (int a : p.roads) {
      d.road_flow[a] += f;
      (p.cls == VehicleClass::Gv ? d.road_flow_gv : d.road_flow_ev)[a] += f;
    }
    if (p.evcs >= 0) d.station_flow[p.evcs] += f;
  }
  for (std::size_t a = 0; a < na; ++a) {
    d.road_time.push_back(blk.road_curve[a].evaluate(d.road_flow[a]));
    d.road_toll.push_back(x[blk.road_toll[a]]);
    d.road_cost.push_back(gp.time_value * d.road_time[a] + d.road_toll[a]);
  }
  for (std::size_t m = 0; m < nm; ++m) {
    d.station_time.push_back(blk.station_curve[m].evaluate(d.station_flow[m]));
    d.station_fee.push_back(x[blk.station_fee[m]]);
    d.station_cost.push_back(gp.time_value * d.station_time[m] + inst.evcs[m].charging_price * gp.battery_energy +
                             d.station_fee[m]);
  }
  for (const PathAlt& p : ps.paths) {
    double c = 0.0;
    for (int a : p.roads) c += d.road_cost[a];
    if (p.evcs >= 0) c += d.station_cost[p.evcs];
    d.path_cost.push_back(c);
  }
  d.od_cost.assign(blk.od_cost.size(), 0.0);
  for (std::size_t k = 0; k < blk.od_cost.size(); ++k) {
    if (blk.od_cost[k] < 0) continue;
    d.od_cost[k] = x[blk.od_cost[k]];
    const OdPair& od = inst.od_pairs[k / 2];
    d.gamma += gp.traffic_base * d.od_cost[k] * (k % 2 ? od.ev_demand : od.gv_demand);
  }
  d.charging_load = charging_load(d.station_flow, gp);
  return d;
}

WardropReport verify_wardrop(const CoupledInstance& inst, const PathSet& ps, const TrafficDecision& dec, double tol) {
  WardropReport rep;
  auto flag = [&](const std::string& msg) { rep.violations.push_back(msg); };
  for (const PathAlt& p : ps.paths) {
    const int k = 2 * p.od + (p.cls == VehicleClass::Ev ? 1 : 0);
    const double u = dec.od_cost[k];
    const double c = dec.path_cost[p.id];
    const double gap = c - u;
    rep.max_undercut = std::max(rep.max_undercut, -gap);
    if (gap < -tol) {
      std::ostringstream os;
      os << "alternative " << p.id + 1 << ": cost " << c << " below O-D cost " << u;
      flag(os.str());
    }
    if (dec.path_flow[p.id] > tol) {
      rep.max_used_gap = std::max(rep.max_used_gap, std::abs(gap));
      if (std::abs(gap) > tol) {
        std::ostringstream os;
        os << "alternative " << p.id + 1 << ": used with cost " << c << " but O-D cost " << u;
        flag(os.str());
      }
    }
  }
  for (std::size_t o = 0; o < inst.od_pairs.size(); ++o) {
    for (int cls = 0; cls < 2; ++cls) {
      double q = cls ? inst.od_pairs[o].ev_demand : inst.od_pairs[o].gv_demand;
      double sent = 0.0;
      for (const PathAlt& p : ps.paths)
        if (p.od == static_cast<int>(o) && (p.cls == VehicleClass::Ev) == (cls == 1)) sent += dec.path_flow[p.id];
      if (std::abs(sent - q) > tol) flag("od_pair " + std::to_string(inst.od_pairs[o].id) + ": demand not met");
    }
  }
  // Both sides of the total-cost identity in CNY/h.
  const double base = inst.params.traffic_base;
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t a = 0; a < inst.roads.size(); ++a) lhs += dec.road_cost[a] * dec.road_flow[a];
  for (std::size_t m = 0; m < inst.evcs.size(); ++m) lhs += dec.station_cost[m] * dec.station_flow[m];
  for (std::size_t o = 0; o < inst.od_pairs.size(); ++o)
    rhs += dec.od_cost[2 * o] * inst.od_pairs[o].gv_demand + dec.od_cost[2 * o + 1] * inst.od_pairs[o].ev_demand;
  rep.identity_residual = base * std::abs(lhs - rhs);
  rep.identity_scale = std::max(1.0, base * std::abs(rhs));
  if (rep.identity_residual > tol * rep.identity_scale) flag("total cost identity violated");
  return rep;
}

std::vector<int> overloaded_od_pairs(const CoupledInstance& inst, const PathSet& ps) {
  const Incidence inc = build_incidence(inst, ps);
  std::vector<int> out;
  for (std::size_t o = 0; o < inst.od_pairs.size(); ++o) {
    milp::Model m;
    std::vector<int> flow(ps.paths.size(), -1);
    for (const PathAlt& p : ps.paths)
      if (p.od == static_cast<int>(o)) flow[p.id] = m.add_variable("f" + std::to_string(p.id + 1), 0.0, std::numeric_limits<double>::infinity());
    for (int cls = 0; cls < 2; ++cls) {
      const double q = cls ? inst.od_pairs[o].ev_demand : inst.od_pairs[o].gv_demand;
      LinExpr e;
      for (int p : inc.od_class_paths[2 * o + cls]) e.add(flow[p], 1.0);
      if (q > 0.0 && e.terms().empty()) continue;  // reported by path enumeration
      if (!e.terms().empty()) m.add_constraint("demand" + std::to_string(cls), e, RowSense::Equal, q);
    }
    auto cap_row = [&](const std::string& name, const std::vector<int>& users, double cap) {
      LinExpr e;
      for (int p : users)
        if (flow[p] >= 0) e.add(flow[p], 1.0);
      if (!e.terms().empty()) m.add_constraint(name, e, RowSense::LessEqual, cap);
    };
    for (std::size_t a = 0; a < inst.roads.size(); ++a) cap_row("road" + std::to_string(a), inc.road_paths[a], inst.roads[a].capacity);
    for (std::size_t s = 0; s < inst.evcs.size(); ++s)
      cap_row("evcs" + std::to_string(s), inc.station_paths[s], inst.params.davidson_fraction * inst.evcs[s].capacity);
    if (m.num_vars() == 0) continue;
    if (milp::solve_lp(m).status == milp::SolveStatus::Infeasible) out.push_back(static_cast<int>(o));
  }
  return out;
}

}  // namespace ptcoord
