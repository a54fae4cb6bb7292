#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <unordered_map>

#include "ptcoord/error.hpp"
#include "ptcoord/network.hpp"

namespace ptcoord {

namespace {

// Free-flow times compared as integers (nanohours) so equal-length routes tie exactly.
using Ticks = long long;
Ticks ticks(double hours) { return std::llround(hours * 1e9); }

struct Partial {
  Ticks cost = 0;
  std::vector<int> ids;    // road ids, the tie-break key
  std::vector<int> roads;  // road indices
  int node = 0;
};

struct Later {
  bool operator()(const Partial& a, const Partial& b) const {
    if (a.cost != b.cost) return a.cost > b.cost;
    return a.ids > b.ids;
  }
};

std::vector<int> route_nodes(const CoupledInstance& inst, int origin, const std::vector<int>& roads) {
  std::vector<int> nodes{origin};
  for (int r : roads) nodes.push_back(inst.roads[r].head);
  return nodes;
}

bool loop_free(const std::vector<int>& nodes) {
  std::set<int> seen(nodes.begin(), nodes.end());
  return seen.size() == nodes.size();
}

std::vector<int> road_ids(const CoupledInstance& inst, const std::vector<int>& roads) {
  std::vector<int> ids;
  ids.reserve(roads.size());
  for (int r : roads) ids.push_back(inst.roads[r].id);
  return ids;
}

}  // namespace

double route_free_flow_time(const CoupledInstance& inst, const std::vector<int>& roads) {
  double t = 0.0;
  for (int r : roads) t += inst.roads[r].free_flow_time;
  return t;
}

std::vector<std::vector<int>> k_shortest_paths(const CoupledInstance& inst, int origin, int destination, int k) {
  if (k < 1) fail(ErrorKind::Validation, "path count K must be >= 1");
  std::unordered_map<int, std::vector<int>> out, in;
  for (std::size_t r = 0; r < inst.roads.size(); ++r) {
    out[inst.roads[r].tail].push_back(static_cast<int>(r));
    in[inst.roads[r].head].push_back(static_cast<int>(r));
  }

  // Nodes that can still reach the destination.
  std::set<int> alive{destination};
  std::vector<int> stack{destination};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int r : in[v])
      if (alive.insert(inst.roads[r].tail).second) stack.push_back(inst.roads[r].tail);
  }

  std::vector<std::vector<int>> result;
  if (!alive.count(origin) || origin == destination) return result;

  // Best-first over loop-free partial routes. With positive road times every
  // prefix is popped before its completions, so completions leave the queue
  // in (time, road-id sequence) order.
  std::priority_queue<Partial, std::vector<Partial>, Later> open;
  open.push(Partial{0, {}, {}, origin});
  long budget = 2'000'000;
  while (!open.empty() && static_cast<int>(result.size()) < k && budget-- > 0) {
    Partial p = open.top();
    open.pop();
    if (p.node == destination) {
      result.push_back(std::move(p.roads));
      continue;
    }
    const std::vector<int> visited = route_nodes(inst, origin, p.roads);
    for (int r : out[p.node]) {
      const int h = inst.roads[r].head;
      if (!alive.count(h) || std::find(visited.begin(), visited.end(), h) != visited.end()) continue;
      Partial q = p;
      q.cost += ticks(inst.roads[r].free_flow_time);
      q.ids.push_back(inst.roads[r].id);
      q.roads.push_back(r);
      q.node = h;
      open.push(std::move(q));
    }
  }
  return result;
}

PathSet enumerate_paths(const CoupledInstance& inst, int k) {
  if (k < 1) fail(ErrorKind::Validation, "path count K must be >= 1");
  PathSet ps;
  ps.k = k;
  auto add = [&](int od, VehicleClass cls, std::vector<int> roads, int station) {
    PathAlt alt;
    alt.id = static_cast<int>(ps.paths.size());
    alt.od = od;
    alt.cls = cls;
    alt.roads = std::move(roads);
    alt.evcs = station;
    ps.paths.push_back(std::move(alt));
  };

  for (std::size_t o = 0; o < inst.od_pairs.size(); ++o) {
    const OdPair& od = inst.od_pairs[o];
    const int oi = static_cast<int>(o);
    if (od.gv_demand > 0.0) {
      auto routes = k_shortest_paths(inst, od.origin, od.destination, k);
      if (routes.empty())
        fail(ErrorKind::Infeasible, "od_pair " + std::to_string(od.id) + ": no GV route from origin to destination");
      for (auto& r : routes) add(oi, VehicleClass::Gv, std::move(r), -1);
    }
    if (od.ev_demand > 0.0) {
      std::size_t before = ps.paths.size();
      for (std::size_t m = 0; m < inst.evcs.size(); ++m) {
        const int node = inst.evcs[m].node;
        const std::vector<std::vector<int>> empty{{}};
        const auto first = node == od.origin ? empty : k_shortest_paths(inst, od.origin, node, k);
        const auto second = node == od.destination ? empty : k_shortest_paths(inst, node, od.destination, k);
        std::vector<std::pair<std::pair<Ticks, std::vector<int>>, std::vector<int>>> composites;
        std::set<std::vector<int>> seen;
        for (const auto& a : first) {
          for (const auto& b : second) {
            std::vector<int> roads = a;
            roads.insert(roads.end(), b.begin(), b.end());
            if (!loop_free(route_nodes(inst, od.origin, roads)) || !seen.insert(roads).second) continue;
            Ticks t = 0;
            for (int r : roads) t += ticks(inst.roads[r].free_flow_time);
            composites.push_back({{t, road_ids(inst, roads)}, std::move(roads)});
          }
        }
        std::sort(composites.begin(), composites.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        if (static_cast<int>(composites.size()) > k) composites.resize(k);
        for (auto& c : composites) add(oi, VehicleClass::Ev, std::move(c.second), static_cast<int>(m));
      }
      if (ps.paths.size() == before)
        fail(ErrorKind::Infeasible,
             "od_pair " + std::to_string(od.id) + ": no EV route through any charging station");
    }
  }
  return ps;
}

Incidence build_incidence(const CoupledInstance& inst, const PathSet& ps) {
  Incidence inc;
  inc.road_paths.resize(inst.roads.size());
  inc.station_paths.resize(inst.evcs.size());
  inc.od_class_paths.resize(2 * inst.od_pairs.size());
  for (const PathAlt& p : ps.paths) {
    for (int r : p.roads) inc.road_paths[r].push_back(p.id);
    if (p.evcs >= 0) inc.station_paths[p.evcs].push_back(p.id);
    inc.od_class_paths[2 * p.od + (p.cls == VehicleClass::Ev ? 1 : 0)].push_back(p.id);
  }
  return inc;
}

}  // namespace ptcoord
