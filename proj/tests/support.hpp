#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>
#include <cmath>

#include "json.hpp"
#include "ptcoord/milp/model.hpp"
#include "ptcoord/network.hpp"

namespace testsupport {

using nlohmann::json;

inline std::string bundled_path() { return std::string(PTCOORD_DATA_DIR) + "/bundled.json"; }

inline json bundled_json() {
  std::ifstream f(bundled_path());
  return json::parse(f);
}

inline json default_params() {
  return {{"time_value_cny_h", 100}, {"battery_energy_kwh", 100}, {"davidson_j", 0.15},
          {"traffic_base_veh_h", 100}, {"power_base_mva", 100}, {"road_segments", 5},
          {"cost_segments", 3}, {"paths_k", 4}, {"toll_max_cny", 100}};
}

/// One-bus power side with a substation and one coupled station per entry.
inline json one_bus_power(double demand_mw = 0.0, double price = 400.0) {
  return {{"buses", json::array({{{"id", 1}, {"demand_mw", demand_mw}}})},
          {"lines", json::array()},
          {"generators", json::array()},
          {"substation", {{"bus", 1}, {"price_cny_mwh", price}, {"import_min_mw", 0}, {"import_max_mw", 10000}}}};
}

inline json road(int id, int tail, int head, double t0_min, double cap) {
  return {{"id", id}, {"tail", tail}, {"head", head}, {"free_flow_time_min", t0_min}, {"capacity_veh_h", cap}};
}

inline json station(int id, int node, double t0_min, double cap, double price = 0.6) {
  return {{"id", id}, {"node", node}, {"base_service_time_min", t0_min}, {"capacity_veh_h", cap},
          {"charging_price_cny_kwh", price}};
}

inline json od(int id, int o, int d, double gv, double ev) {
  return {{"id", id}, {"origin", o}, {"destination", d}, {"gv_demand_veh_h", gv}, {"ev_demand_veh_h", ev}};
}

/// Two nodes joined by two parallel roads; one station at node 2.
inline json parallel_roads(double gv, double t0a = 10, double t0b = 10, double cap = 2000) {
  json j;
  j["name"] = "parallel";
  j["traffic"] = {{"nodes", {1, 2}},
                  {"roads", {road(1, 1, 2, t0a, cap), road(2, 1, 2, t0b, cap)}},
                  {"evcs", {station(1, 2, 20, 1000)}},
                  {"od_pairs", {od(1, 1, 2, gv, 0)}}};
  j["power"] = one_bus_power();
  j["coupling"] = {{{"evcs", 1}, {"bus", 1}}};
  j["params"] = default_params();
  return j;
}

/// Random connected instance with at most 8 nodes and 3 O-D pairs, served by
/// a radial feeder with one generator.
inline json random_instance(unsigned seed) {
  std::mt19937 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

  const int n = pick(4, 8);
  json nodes = json::array();
  for (int i = 1; i <= n; ++i) nodes.push_back(i);
  json roads = json::array();
  int rid = 1;
  // chain 1 -> 2 -> ... -> n plus random shortcuts and a few back edges
  for (int i = 1; i < n; ++i) roads.push_back(road(rid++, i, i + 1, uni(5, 15), uni(2500, 4000)));
  const int extra = pick(2, 5);
  for (int e = 0; e < extra; ++e) {
    int a = pick(1, n - 1), b = pick(a + 1, n);
    roads.push_back(road(rid++, a, b, uni(8, 25), uni(2500, 4000)));
  }
  roads.push_back(road(rid++, n, 1, uni(10, 20), 2000));

  const int pairs = pick(1, 3);
  std::vector<int> station_nodes;
  json ods = json::array();
  for (int k = 1; k <= pairs; ++k) {
    const int o = pick(1, n - 2);
    const int d = pick(o + 2, n);
    double ev = std::round(uni(100, 300));
    bool served = false;
    for (int s : station_nodes) served = served || (s > o && s < d);
    if (!served) {
      if (station_nodes.size() < 3) station_nodes.push_back(pick(o + 1, d - 1));
      else ev = 0.0;
    }
    ods.push_back(od(k, o, d, std::round(uni(0, 500)), ev));
  }
  if (station_nodes.empty()) station_nodes.push_back(pick(2, n - 1));
  const int stations = static_cast<int>(station_nodes.size());
  json evcs = json::array();
  json coupling = json::array();
  for (int s = 1; s <= stations; ++s) {
    evcs.push_back(station(s, station_nodes[s - 1], uni(15, 30), uni(800, 1200)));
    coupling.push_back({{"evcs", s}, {"bus", 1 + s}});
  }

  json buses = json::array();
  json lines = json::array();
  for (int b = 1; b <= stations + 2; ++b) buses.push_back({{"id", b}, {"demand_mw", b == 1 ? 0.0 : uni(0, 20)}});
  // Station feeders carry at least the bus demand plus the station at its flow
  // bound, so the baseline dispatch is always feasible.
  for (int b = 2; b <= stations + 2; ++b) {
    const double floor = buses[b - 1]["demand_mw"].get<double>() + (b <= stations + 1 ? 120.0 : 0.0);
    lines.push_back({{"id", b - 1}, {"from", 1}, {"to", b}, {"reactance_pu", 0.1}, {"flow_limit_mw", floor + uni(5, 100)}});
  }

  json j;
  j["name"] = "random-" + std::to_string(seed);
  j["traffic"] = {{"nodes", nodes}, {"roads", roads}, {"evcs", evcs}, {"od_pairs", ods}};
  j["power"] = {{"buses", buses},
                {"lines", lines},
                {"generators", {{{"id", 1}, {"bus", stations + 2}, {"a_cny_mw2h", uni(1, 6)}, {"b_cny_mwh", 200},
                                 {"c_cny_h", 300}, {"p_min_mw", 0}, {"p_max_mw", 200}}}},
                {"substation", {{"bus", 1}, {"price_cny_mwh", 400}, {"import_min_mw", 0}, {"import_max_mw", 2000}}}};
  j["coupling"] = coupling;
  j["params"] = default_params();
  return j;
}

/// Random bounded MILP with up to 12 binaries and 20 continuous columns.
inline ptcoord::milp::Model random_milp(unsigned seed) {
  using namespace ptcoord::milp;
  std::mt19937 rng(seed);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  Model m;
  const int nb = pick(1, 12), nc = pick(0, 20);
  std::vector<int> vars;
  for (int j = 0; j < nb; ++j) vars.push_back(m.add_binary("z" + std::to_string(j)));
  for (int j = 0; j < nc; ++j) {
    const double lo = pick(0, 3) == 0 ? -uni(0, 5) : 0.0;
    vars.push_back(m.add_variable("x" + std::to_string(j), lo, lo + uni(1, 10)));
  }
  const int rows = pick(1, 10);
  for (int i = 0; i < rows; ++i) {
    LinExpr e;
    for (int v : vars)
      if (pick(0, 2) == 0) e.add(v, std::round(uni(-10, 10) * 4) / 4);
    if (e.terms().empty()) e.add(vars[pick(0, static_cast<int>(vars.size()) - 1)], 1.0);
    const int kind = pick(0, 9);
    const RowSense sense = kind < 6 ? RowSense::LessEqual : (kind < 9 ? RowSense::GreaterEqual : RowSense::Equal);
    const double rhs = std::round(uni(-10, 20));
    m.add_constraint("r" + std::to_string(i), e, sense, sense == RowSense::GreaterEqual ? -rhs : rhs);
  }
  LinExpr obj;
  for (int v : vars) obj.add(v, std::round(uni(-10, 10) * 8) / 8);
  m.set_objective(obj);
  return m;
}

inline ptcoord::CoupledInstance make(const json& j) { return ptcoord::parse_instance(j.dump()); }

}  // namespace testsupport
