#include "ptcoord/report.hpp"

#include <cstdio>
#include <fstream>

#include "ptcoord/error.hpp"

namespace ptcoord {

const std::vector<std::string> kSweepColumns = {
    "alpha", "gamma", "eta",  "delta_eta", "delta_gamma", "psi",   "h",
    "overall", "tn_net_profit", "pdn_net_profit", "status", "gap", "nodes", "wall_seconds"};

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string alpha_label(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", alpha);
  return buf;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points, const CsvOptions& opt) {
  for (std::size_t i = 0; i < kSweepColumns.size(); ++i) out << (i ? "," : "") << kSweepColumns[i];
  out << "\n";
  for (const SweepPoint& p : points) {
    const bool has = p.status == milp::SolveStatus::Optimal || p.status == milp::SolveStatus::GapLimit;
    auto num = [&](double v) { return has ? csv_number(v) : std::string(); };
    out << csv_number(p.alpha) << ',' << num(p.gamma) << ',' << num(p.eta) << ',' << num(p.delta_eta) << ','
        << num(p.delta_gamma) << ',' << num(p.psi) << ',' << num(p.h) << ',' << num(p.overall) << ','
        << num(p.tn_net_profit) << ',' << num(p.pdn_net_profit) << ','
        << (p.accepted ? "optimal" : (p.status == milp::SolveStatus::Optimal ? "flagged" : milp::to_string(p.status)))
        << ',' << csv_number(p.gap) << ',' << p.nodes << ',' << csv_number(opt.timing ? p.wall_seconds : 0.0) << "\n";
  }
}

void write_loads_csv(std::ostream& out, const CoupledInstance& inst, const TrafficDecision& t) {
  out << "evcs_id,y,p_evcs\n";
  for (std::size_t m = 0; m < inst.evcs.size(); ++m)
    out << inst.evcs[m].id << ',' << csv_number(t.station_flow[m]) << ',' << csv_number(t.charging_load[m]) << "\n";
}

void write_gen_csv(std::ostream& out, const CoupledInstance& inst, const DispatchDecision& d) {
  out << "unit,output,F\n";
  for (std::size_t k = 0; k < d.output.size(); ++k) {
    const std::string unit = k < inst.generators.size() ? "gen" + std::to_string(inst.generators[k].id) : "substation";
    out << unit << ',' << csv_number(d.output[k]) << ',' << csv_number(d.cost[k]) << "\n";
  }
}

void write_flows_csv(std::ostream& out, const CoupledInstance& inst, const PathSet& ps, const TrafficDecision& t) {
  out << "alternative,od_id,class,evcs_id,roads,flow,cost,od_cost\n";
  for (const PathAlt& p : ps.paths) {
    out << p.id + 1 << ',' << inst.od_pairs[p.od].id << ',' << (p.cls == VehicleClass::Ev ? "EV" : "GV") << ','
        << (p.evcs >= 0 ? std::to_string(inst.evcs[p.evcs].id) : std::string()) << ',';
    for (std::size_t i = 0; i < p.roads.size(); ++i) out << (i ? "-" : "") << inst.roads[p.roads[i]].id;
    const int k = 2 * p.od + (p.cls == VehicleClass::Ev ? 1 : 0);
    out << ',' << csv_number(t.path_flow[p.id]) << ',' << csv_number(t.path_cost[p.id]) << ','
        << csv_number(t.od_cost[k]) << "\n";
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  f << content;
  if (!f) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

}  // namespace ptcoord
