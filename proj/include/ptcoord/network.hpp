#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ptcoord {

// Internal units: traffic flow in p.u. of the traffic base, time in hours,
// power in MW, money in CNY. The loader converts from the file units.

struct Road {
  int id = 0;
  int tail = 0;
  int head = 0;
  double free_flow_time = 0.0;  // h
  double capacity = 0.0;        // traffic p.u.
};

struct Evcs {
  int id = 0;
  int node = 0;
  int bus = 0;
  double base_service_time = 0.0;  // h
  double capacity = 0.0;           // traffic p.u.
  double charging_price = 0.0;     // CNY/kWh
};

struct OdPair {
  int id = 0;
  int origin = 0;
  int destination = 0;
  double gv_demand = 0.0;  // traffic p.u.
  double ev_demand = 0.0;  // traffic p.u.
};

struct Bus {
  int id = 0;
  double demand = 0.0;  // MW, conventional load
  double angle_min = 0.0;  // rad
  double angle_max = 0.0;  // rad
};

struct Line {
  int id = 0;
  int from = 0;
  int to = 0;
  double reactance = 0.0;   // p.u.
  double flow_limit = 0.0;  // MW
};

struct Generator {
  int id = 0;
  int bus = 0;
  double a = 0.0;  // CNY/(MW^2 h)
  double b = 0.0;  // CNY/MWh
  double c = 0.0;  // CNY/h
  double p_min = 0.0;  // MW
  double p_max = 0.0;  // MW
};

struct Substation {
  int bus = 0;
  double price = 0.0;       // CNY/MWh
  double import_min = 0.0;  // MW
  double import_max = 0.0;  // MW
};

struct GlobalParams {
  double time_value = 100.0;            // CNY/h per vehicle
  double battery_energy = 100.0;        // kWh per charge
  double davidson_j = 0.15;
  double traffic_base = 100.0;          // veh/h per p.u.
  double power_base = 100.0;            // MVA
  int road_segments = 5;                // PWL segments per travel-time curve
  int cost_segments = 3;                // PWL segments per generator cost curve
  double davidson_fraction = 0.95;      // station flow bound as a fraction of capacity
  double big_m_safety = 1.1;
  double dual_price_bound = 3000.0;     // CNY/MWh, scale of the KKT multiplier bounds
  std::optional<double> toll_max;       // CNY; default 10 * time_value * longest free-flow route time
  int paths_k = 6;
};

enum class VehicleClass : unsigned char { Gv, Ev };

struct PathAlt {
  int id = 0;        // index in PathSet::paths
  int od = 0;        // index into CoupledInstance::od_pairs
  VehicleClass cls = VehicleClass::Gv;
  std::vector<int> roads;  // indices into CoupledInstance::roads
  int evcs = -1;           // index into CoupledInstance::evcs, -1 for GV
};

struct PathSet {
  std::vector<PathAlt> paths;
  int k = 0;
};

struct CoupledInstance {
  std::string name;
  std::vector<int> nodes;
  std::vector<Road> roads;
  std::vector<Evcs> evcs;
  std::vector<OdPair> od_pairs;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  Substation substation;
  GlobalParams params;

  int bus_index(int bus_id) const;   // -1 when absent
  int node_index(int node_id) const;
  // P[MW] per unit of station flow (traffic p.u.).
  double load_per_flow() const { return params.traffic_base * params.battery_energy / 1000.0; }
};

/// Parses and validates an instance document (JSON text). Errors name the
/// offending entity and field.
CoupledInstance parse_instance(const std::string& json_text);
CoupledInstance load_instance(const std::string& path);

/// Throws a validation error on the first broken invariant.
void validate_instance(const CoupledInstance& inst);

/// Up to k loop-free node-to-node road sequences, ranked by free-flow time and
/// then by lexicographic road-id sequence. Returns road indices.
std::vector<std::vector<int>> k_shortest_paths(const CoupledInstance& inst, int origin, int destination, int k);

/// GV alternatives per O-D pair plus EV alternatives through every station.
PathSet enumerate_paths(const CoupledInstance& inst, int k);

/// Free-flow travel time of a road sequence in hours.
double route_free_flow_time(const CoupledInstance& inst, const std::vector<int>& roads);

struct Incidence {
  // road_paths[a]: alternatives using road a; station_paths[m]: EV alternatives charging at m.
  std::vector<std::vector<int>> road_paths;
  std::vector<std::vector<int>> station_paths;
  // od_class_paths[2*od + cls]
  std::vector<std::vector<int>> od_class_paths;
};

Incidence build_incidence(const CoupledInstance& inst, const PathSet& ps);

}  // namespace ptcoord
