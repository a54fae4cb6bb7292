#pragma once

#include <string>
#include <vector>

#include "ptcoord/linearization.hpp"
#include "ptcoord/milp/model.hpp"
#include "ptcoord/network.hpp"

namespace ptcoord {

/// BPR travel time in hours; x in traffic p.u.
double bpr_time(double x, const Road& road);
/// Davidson station time in hours; y must stay below fraction * capacity.
double davidson_time(double y, const Evcs& station, const GlobalParams& params);
/// Charging load in MW per station for station flows in traffic p.u.
std::vector<double> charging_load(const std::vector<double>& y, const GlobalParams& params);

/// Toll and entry-fee ceiling: the instance value or 10 * time value * longest
/// free-flow alternative (road time plus station time).
double toll_bound(const CoupledInstance& inst, const PathSet& ps);

struct UeOptions {
  double m_scale = 1.0;  // multiplies every estimated big-M (audit retry)
};

/// Variables and expressions of the equilibrium constraint block.
struct UeBlock {
  std::vector<int> path_flow;  // per alternative
  std::vector<PwlCurve> road_curve;
  std::vector<FillOrder> road_fill;
  std::vector<int> road_toll;
  std::vector<PwlCurve> station_curve;
  std::vector<FillOrder> station_fill;
  std::vector<int> station_fee;
  std::vector<int> od_cost;  // per (od, class) as 2*od + class; -1 when the class has no demand
  std::vector<milp::LinExpr> path_cost;  // CNY
  std::vector<milp::LinExpr> station_flow;  // traffic p.u., sum of EV path flows
  std::vector<milp::LinExpr> station_load;  // MW
  std::vector<BigMPair> pairs;              // one per alternative
  milp::LinExpr gamma;                      // CNY/h
  double toll_max = 0.0;
};

/// Demand balance, incidence, capacity bounds, linearized time curves, cost
/// composition and big-M linearized equilibrium complementarity.
UeBlock assemble_ue_block(milp::Model& model, const CoupledInstance& inst, const PathSet& ps,
                          const UeOptions& opt = {});

struct TrafficDecision {
  std::vector<double> path_flow;  // traffic p.u.
  std::vector<double> road_flow, road_flow_gv, road_flow_ev;
  std::vector<double> station_flow;
  std::vector<double> road_time, station_time;  // h, from the linearized curves
  std::vector<double> road_toll, station_fee;   // CNY
  std::vector<double> road_cost, station_cost;  // CNY
  std::vector<double> path_cost;                // CNY
  std::vector<double> od_cost;                  // CNY per (od, class); 0 when absent
  std::vector<double> charging_load;            // MW
  double gamma = 0.0;                           // CNY/h
};

/// Rebuilds all traffic quantities from path flows, tolls, fees and O-D costs
/// of a solved point; times come from the interpolated curves, not from the
/// fill variables.
TrafficDecision extract_traffic(const CoupledInstance& inst, const PathSet& ps, const UeBlock& block,
                                const std::vector<double>& x);

struct WardropReport {
  std::vector<std::string> violations;
  double max_used_gap = 0.0;    // max |C_p - u| over used alternatives
  double max_undercut = 0.0;    // max (u - C_p) over all alternatives
  double identity_residual = 0.0;  // |sum C x + sum C y - sum u q|, CNY per p.u.
  double identity_scale = 1.0;
  bool ok() const { return violations.empty(); }
};

WardropReport verify_wardrop(const CoupledInstance& inst, const PathSet& ps, const TrafficDecision& dec, double tol);

/// O-D pairs (indices) whose own demand cannot be routed over their
/// alternatives within road capacities and station flow bounds. Empty when
/// each pair fits alone.
std::vector<int> overloaded_od_pairs(const CoupledInstance& inst, const PathSet& ps);

}  // namespace ptcoord
