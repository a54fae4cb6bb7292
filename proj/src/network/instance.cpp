#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "ptcoord/error.hpp"
#include "ptcoord/network.hpp"

namespace ptcoord {

using nlohmann::json;

namespace {

std::string where(const std::string& entity, int id) { return entity + " " + std::to_string(id); }

const json& section(const json& doc, const char* key, const std::string& ctx) {
  if (!doc.is_object() || !doc.contains(key)) fail(ErrorKind::Validation, ctx + ": missing '" + key + "'");
  return doc.at(key);
}

const json& array_field(const json& doc, const char* key, const std::string& ctx) {
  const json& a = section(doc, key, ctx);
  if (!a.is_array()) fail(ErrorKind::Validation, ctx + ": '" + key + "' must be an array");
  return a;
}

double number(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.contains(key)) fail(ErrorKind::Validation, ctx + ": missing field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) fail(ErrorKind::Validation, ctx + ": field '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(ErrorKind::Validation, ctx + ": field '" + key + "' is not finite");
  return d;
}

double number_or(const json& obj, const char* key, double fallback, const std::string& ctx) {
  return obj.contains(key) ? number(obj, key, ctx) : fallback;
}

int integer(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.contains(key)) fail(ErrorKind::Validation, ctx + ": missing field '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(ErrorKind::Validation, ctx + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

void positive(double v, const std::string& ctx, const char* field) {
  if (!(v > 0.0)) fail(ErrorKind::Validation, ctx + ": field '" + field + "' must be positive");
}

void nonnegative(double v, const std::string& ctx, const char* field) {
  if (!(v >= 0.0)) fail(ErrorKind::Validation, ctx + ": field '" + field + "' must be nonnegative");
}

template <class T>
void unique_ids(const std::vector<T>& items, const std::string& entity) {
  std::set<int> seen;
  for (const T& it : items)
    if (!seen.insert(it.id).second) fail(ErrorKind::Validation, where(entity, it.id) + ": duplicate id");
}

}  // namespace

int CoupledInstance::bus_index(int bus_id) const {
  for (std::size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == bus_id) return static_cast<int>(i);
  return -1;
}

int CoupledInstance::node_index(int node_id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == node_id) return static_cast<int>(i);
  return -1;
}

CoupledInstance parse_instance(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Validation, std::string("instance parse error: ") + e.what());
  }

  CoupledInstance inst;
  if (doc.contains("name") && doc.at("name").is_string()) inst.name = doc.at("name").get<std::string>();

  const json& params = section(doc, "params", "instance");
  GlobalParams& gp = inst.params;
  const std::string pctx = "params";
  gp.time_value = number_or(params, "time_value_cny_h", gp.time_value, pctx);
  gp.battery_energy = number_or(params, "battery_energy_kwh", gp.battery_energy, pctx);
  gp.davidson_j = number_or(params, "davidson_j", gp.davidson_j, pctx);
  gp.traffic_base = number_or(params, "traffic_base_veh_h", gp.traffic_base, pctx);
  gp.power_base = number_or(params, "power_base_mva", gp.power_base, pctx);
  if (params.contains("road_segments")) gp.road_segments = integer(params, "road_segments", pctx);
  if (params.contains("cost_segments")) gp.cost_segments = integer(params, "cost_segments", pctx);
  if (params.contains("paths_k")) gp.paths_k = integer(params, "paths_k", pctx);
  gp.davidson_fraction = number_or(params, "davidson_fraction", gp.davidson_fraction, pctx);
  gp.big_m_safety = number_or(params, "big_m_safety", gp.big_m_safety, pctx);
  gp.dual_price_bound = number_or(params, "dual_price_bound_cny_mwh", gp.dual_price_bound, pctx);
  if (params.contains("toll_max_cny")) gp.toll_max = number(params, "toll_max_cny", pctx);

  const double tb = gp.traffic_base;
  positive(tb, pctx, "traffic_base_veh_h");

  const json& traffic = section(doc, "traffic", "instance");
  for (const json& n : array_field(traffic, "nodes", "traffic")) {
    if (!n.is_number_integer()) fail(ErrorKind::Validation, "traffic: node ids must be integers");
    inst.nodes.push_back(n.get<int>());
  }
  for (const json& r : array_field(traffic, "roads", "traffic")) {
    Road road;
    road.id = integer(r, "id", "road");
    const std::string ctx = where("road", road.id);
    road.tail = integer(r, "tail", ctx);
    road.head = integer(r, "head", ctx);
    road.free_flow_time = number(r, "free_flow_time_min", ctx) / 60.0;
    road.capacity = number(r, "capacity_veh_h", ctx) / tb;
    inst.roads.push_back(road);
  }
  for (const json& e : array_field(traffic, "evcs", "traffic")) {
    Evcs s;
    s.id = integer(e, "id", "evcs");
    const std::string ctx = where("evcs", s.id);
    s.node = integer(e, "node", ctx);
    s.base_service_time = number(e, "base_service_time_min", ctx) / 60.0;
    s.capacity = number(e, "capacity_veh_h", ctx) / tb;
    s.charging_price = number(e, "charging_price_cny_kwh", ctx);
    s.bus = -1;
    inst.evcs.push_back(s);
  }
  for (const json& o : array_field(traffic, "od_pairs", "traffic")) {
    OdPair od;
    od.id = integer(o, "id", "od_pair");
    const std::string ctx = where("od_pair", od.id);
    od.origin = integer(o, "origin", ctx);
    od.destination = integer(o, "destination", ctx);
    od.gv_demand = number_or(o, "gv_demand_veh_h", 0.0, ctx) / tb;
    od.ev_demand = number_or(o, "ev_demand_veh_h", 0.0, ctx) / tb;
    inst.od_pairs.push_back(od);
  }

  const json& power = section(doc, "power", "instance");
  for (const json& b : array_field(power, "buses", "power")) {
    Bus bus;
    bus.id = integer(b, "id", "bus");
    const std::string ctx = where("bus", bus.id);
    bus.demand = number_or(b, "demand_mw", 0.0, ctx);
    bus.angle_min = number_or(b, "angle_min_rad", -std::numbers::pi, ctx);
    bus.angle_max = number_or(b, "angle_max_rad", std::numbers::pi, ctx);
    inst.buses.push_back(bus);
  }
  for (const json& l : array_field(power, "lines", "power")) {
    Line line;
    line.id = integer(l, "id", "line");
    const std::string ctx = where("line", line.id);
    line.from = integer(l, "from", ctx);
    line.to = integer(l, "to", ctx);
    line.reactance = number(l, "reactance_pu", ctx);
    line.flow_limit = number(l, "flow_limit_mw", ctx);
    inst.lines.push_back(line);
  }
  for (const json& g : array_field(power, "generators", "power")) {
    Generator gen;
    gen.id = integer(g, "id", "generator");
    const std::string ctx = where("generator", gen.id);
    gen.bus = integer(g, "bus", ctx);
    gen.a = number(g, "a_cny_mw2h", ctx);
    gen.b = number(g, "b_cny_mwh", ctx);
    gen.c = number(g, "c_cny_h", ctx);
    gen.p_min = number_or(g, "p_min_mw", 0.0, ctx);
    gen.p_max = number(g, "p_max_mw", ctx);
    inst.generators.push_back(gen);
  }
  const json& sub = section(power, "substation", "power");
  if (sub.is_array()) fail(ErrorKind::Validation, "power: exactly one substation is required");
  inst.substation.bus = integer(sub, "bus", "substation");
  inst.substation.price = number(sub, "price_cny_mwh", "substation");
  inst.substation.import_min = number_or(sub, "import_min_mw", 0.0, "substation");
  if (sub.contains("import_max_mw")) {
    inst.substation.import_max = number(sub, "import_max_mw", "substation");
  } else {
    // Ceiling on total demand: conventional load plus every station at its flow bound.
    double ceiling = 0.0;
    for (const Bus& b : inst.buses) ceiling += std::max(0.0, b.demand);
    for (const Evcs& s : inst.evcs) ceiling += gp.davidson_fraction * s.capacity * inst.load_per_flow();
    inst.substation.import_max = ceiling;
  }

  std::unordered_map<int, int> coupled;
  for (const json& c : array_field(doc, "coupling", "instance")) {
    const int sid = integer(c, "evcs", "coupling");
    const int bus = integer(c, "bus", where("coupling for evcs", sid));
    if (!coupled.emplace(sid, bus).second) fail(ErrorKind::Validation, where("evcs", sid) + ": coupled twice");
  }
  for (Evcs& s : inst.evcs) {
    auto it = coupled.find(s.id);
    if (it == coupled.end()) fail(ErrorKind::Validation, where("evcs", s.id) + ": missing coupling entry (field 'bus')");
    s.bus = it->second;
    coupled.erase(it);
  }
  if (!coupled.empty())
    fail(ErrorKind::Validation, where("coupling for evcs", coupled.begin()->first) + ": unknown EVCS");

  validate_instance(inst);
  return inst;
}

CoupledInstance load_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot open instance file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_instance(ss.str());
}

void validate_instance(const CoupledInstance& inst) {
  const GlobalParams& gp = inst.params;
  const std::string pctx = "params";
  positive(gp.time_value, pctx, "time_value_cny_h");
  positive(gp.battery_energy, pctx, "battery_energy_kwh");
  positive(gp.davidson_j, pctx, "davidson_j");
  positive(gp.traffic_base, pctx, "traffic_base_veh_h");
  positive(gp.power_base, pctx, "power_base_mva");
  positive(gp.big_m_safety, pctx, "big_m_safety");
  positive(gp.dual_price_bound, pctx, "dual_price_bound_cny_mwh");
  if (gp.road_segments < 2) fail(ErrorKind::Validation, "params: field 'road_segments' must be >= 2");
  if (gp.cost_segments < 1) fail(ErrorKind::Validation, "params: field 'cost_segments' must be >= 1");
  if (gp.paths_k < 1) fail(ErrorKind::Validation, "params: field 'paths_k' must be >= 1");
  if (!(gp.davidson_fraction > 0.0 && gp.davidson_fraction < 1.0))
    fail(ErrorKind::Validation, "params: field 'davidson_fraction' must lie in (0,1)");
  if (gp.toll_max) positive(*gp.toll_max, pctx, "toll_max_cny");

  std::set<int> nodes(inst.nodes.begin(), inst.nodes.end());
  if (nodes.size() != inst.nodes.size()) fail(ErrorKind::Validation, "traffic: duplicate node id");
  unique_ids(inst.roads, "road");
  unique_ids(inst.evcs, "evcs");
  unique_ids(inst.od_pairs, "od_pair");
  unique_ids(inst.buses, "bus");
  unique_ids(inst.lines, "line");
  unique_ids(inst.generators, "generator");

  auto node_known = [&](int id, const std::string& ctx, const char* field) {
    if (!nodes.count(id)) fail(ErrorKind::Validation, ctx + ": field '" + field + "' references missing node " + std::to_string(id));
  };
  auto bus_known = [&](int id, const std::string& ctx, const char* field) {
    if (inst.bus_index(id) < 0)
      fail(ErrorKind::Validation, ctx + ": field '" + field + "' references missing bus " + std::to_string(id));
  };

  for (const Road& r : inst.roads) {
    const std::string ctx = where("road", r.id);
    node_known(r.tail, ctx, "tail");
    node_known(r.head, ctx, "head");
    if (r.tail == r.head) fail(ErrorKind::Validation, ctx + ": tail equals head");
    positive(r.free_flow_time, ctx, "free_flow_time_min");
    positive(r.capacity, ctx, "capacity_veh_h");
  }
  for (const Evcs& s : inst.evcs) {
    const std::string ctx = where("evcs", s.id);
    node_known(s.node, ctx, "node");
    bus_known(s.bus, ctx, "bus");
    positive(s.base_service_time, ctx, "base_service_time_min");
    positive(s.capacity, ctx, "capacity_veh_h");
    nonnegative(s.charging_price, ctx, "charging_price_cny_kwh");
  }
  for (const OdPair& od : inst.od_pairs) {
    const std::string ctx = where("od_pair", od.id);
    node_known(od.origin, ctx, "origin");
    node_known(od.destination, ctx, "destination");
    if (od.origin == od.destination) fail(ErrorKind::Validation, ctx + ": origin equals destination");
    nonnegative(od.gv_demand, ctx, "gv_demand_veh_h");
    nonnegative(od.ev_demand, ctx, "ev_demand_veh_h");
  }
  for (const Bus& b : inst.buses) {
    const std::string ctx = where("bus", b.id);
    if (!(b.angle_min < b.angle_max)) fail(ErrorKind::Validation, ctx + ": angle bounds not ordered");
  }
  for (const Line& l : inst.lines) {
    const std::string ctx = where("line", l.id);
    bus_known(l.from, ctx, "from");
    bus_known(l.to, ctx, "to");
    if (l.from == l.to) fail(ErrorKind::Validation, ctx + ": from equals to");
    positive(l.reactance, ctx, "reactance_pu");
    positive(l.flow_limit, ctx, "flow_limit_mw");
  }
  for (const Generator& g : inst.generators) {
    const std::string ctx = where("generator", g.id);
    bus_known(g.bus, ctx, "bus");
    nonnegative(g.a, ctx, "a_cny_mw2h");
    if (!(g.p_min <= g.p_max)) fail(ErrorKind::Validation, ctx + ": output bounds not ordered");
  }
  bus_known(inst.substation.bus, "substation", "bus");
  nonnegative(inst.substation.price, "substation", "price_cny_mwh");
  if (!(inst.substation.import_min <= inst.substation.import_max))
    fail(ErrorKind::Validation, "substation: import bounds not ordered");
}

}  // namespace ptcoord
