#include <algorithm>
#include <set>

#include "doctest.h"
#include "ptcoord/error.hpp"
#include "ptcoord/network.hpp"
#include "support.hpp"

using namespace ptcoord;
using testsupport::json;

namespace {

std::string error_of(const json& j) {
  try {
    testsupport::make(j);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

// Every loop-free o->d road sequence by depth-first search.
void all_paths(const CoupledInstance& inst, int at, int dest, std::vector<int>& stack, std::set<int>& seen,
               std::vector<std::vector<int>>& out) {
  if (at == dest) {
    out.push_back(stack);
    return;
  }
  for (std::size_t a = 0; a < inst.roads.size(); ++a) {
    const Road& r = inst.roads[a];
    if (r.tail != at || seen.count(r.head)) continue;
    seen.insert(r.head);
    stack.push_back(static_cast<int>(a));
    all_paths(inst, r.head, dest, stack, seen, out);
    stack.pop_back();
    seen.erase(r.head);
  }
}

}  // namespace

TEST_CASE("bundled instance loads with its published counts") {
  const CoupledInstance inst = load_instance(testsupport::bundled_path());
  CHECK(inst.nodes.size() == 12);
  CHECK(inst.roads.size() == 20);
  CHECK(inst.evcs.size() == 6);
  CHECK(inst.lines.size() == 17);
  CHECK(inst.generators.size() == 3);
  CHECK(inst.buses.size() == 18);
  // unit conversion: minutes to hours, veh/h to p.u.
  CHECK(inst.roads[0].free_flow_time == doctest::Approx(10.0 / 60.0));
  CHECK(inst.roads[0].capacity == doctest::Approx(20.0));
  CHECK(inst.load_per_flow() == doctest::Approx(10.0));
}

TEST_CASE("loading is deterministic") {
  const CoupledInstance a = load_instance(testsupport::bundled_path());
  const CoupledInstance b = load_instance(testsupport::bundled_path());
  REQUIRE(a.roads.size() == b.roads.size());
  for (std::size_t i = 0; i < a.roads.size(); ++i) {
    CHECK(a.roads[i].tail == b.roads[i].tail);
    CHECK(a.roads[i].capacity == b.roads[i].capacity);
  }
  const PathSet pa = enumerate_paths(a, 6), pb = enumerate_paths(b, 6);
  REQUIRE(pa.paths.size() == pb.paths.size());
  for (std::size_t i = 0; i < pa.paths.size(); ++i) {
    CHECK(pa.paths[i].roads == pb.paths[i].roads);
    CHECK(pa.paths[i].evcs == pb.paths[i].evcs);
  }
}

TEST_SUITE("validation errors") {
  TEST_CASE("station coupled to a missing bus names the station") {
    json j = testsupport::bundled_json();
    j["coupling"][2]["bus"] = 99;
    const std::string e = error_of(j);
    CHECK(contains(e, "evcs 3"));
    CHECK(contains(e, "bus"));
  }

  TEST_CASE("zero road capacity is rejected") {
    json j = testsupport::bundled_json();
    j["traffic"]["roads"][4]["capacity_veh_h"] = 0;
    const std::string e = error_of(j);
    CHECK(contains(e, "road 5"));
    CHECK(contains(e, "capacity_veh_h"));
  }

  TEST_CASE("missing coupling entry names the station") {
    json j = testsupport::bundled_json();
    j["coupling"].erase(j["coupling"].begin() + 1);
    CHECK(contains(error_of(j), "evcs 2"));
  }

  TEST_CASE("truncated document reports a position") {
    const std::string text = testsupport::bundled_json().dump(2);
    try {
      parse_instance(text.substr(0, text.size() / 2));
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Validation);
      CHECK(contains(e.what(), "line"));
    }
  }

  TEST_CASE("dangling road endpoint and self loop") {
    json j = testsupport::bundled_json();
    j["traffic"]["roads"][0]["head"] = 42;
    CHECK(contains(error_of(j), "road 1"));
    j = testsupport::bundled_json();
    j["traffic"]["roads"][0]["head"] = 1;
    CHECK(contains(error_of(j), "tail equals head"));
  }

  TEST_CASE("negative demand and bad reactance") {
    json j = testsupport::bundled_json();
    j["traffic"]["od_pairs"][0]["gv_demand_veh_h"] = -1;
    CHECK(contains(error_of(j), "od_pair 1"));
    j = testsupport::bundled_json();
    j["power"]["lines"][3]["reactance_pu"] = 0;
    CHECK(contains(error_of(j), "line 4"));
  }

  TEST_CASE("segment count below two is rejected") {
    json j = testsupport::bundled_json();
    j["params"]["road_segments"] = 1;
    CHECK(contains(error_of(j), "road_segments"));
  }
}

TEST_SUITE("paths") {
  TEST_CASE("two parallel roads are both returned by free-flow time") {
    const CoupledInstance inst = testsupport::make(testsupport::parallel_roads(100, 12, 9));
    const auto p = k_shortest_paths(inst, 1, 2, 2);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == std::vector<int>{1});
    CHECK(p[1] == std::vector<int>{0});
  }

  TEST_CASE("equal times tie-break on road ids") {
    const CoupledInstance inst = testsupport::make(testsupport::parallel_roads(100, 10, 10));
    const auto p = k_shortest_paths(inst, 1, 2, 2);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == std::vector<int>{0});
  }

  TEST_CASE("K=1 returns the unique shortest path") {
    const CoupledInstance inst = testsupport::make(testsupport::parallel_roads(100, 12, 9));
    const auto p = k_shortest_paths(inst, 1, 2, 1);
    REQUIRE(p.size() == 1);
    CHECK(p[0] == std::vector<int>{1});
    CHECK(route_free_flow_time(inst, p[0]) == doctest::Approx(9.0 / 60.0));
  }

  TEST_CASE("k shortest paths match exhaustive enumeration") {
    for (unsigned seed = 1; seed <= 20; ++seed) {
      const CoupledInstance inst = testsupport::make(testsupport::random_instance(seed));
      const int o = inst.nodes.front(), d = inst.nodes.back();
      std::vector<std::vector<int>> all;
      std::vector<int> stack;
      std::set<int> seen{o};
      all_paths(inst, o, d, stack, seen, all);
      auto key = [&](const std::vector<int>& p) {
        std::vector<int> ids;
        for (int a : p) ids.push_back(inst.roads[a].id);
        return std::make_pair(std::llround(route_free_flow_time(inst, p) * 3.6e12), ids);
      };
      std::sort(all.begin(), all.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
      const auto got = k_shortest_paths(inst, o, d, 4);
      CAPTURE(seed);
      REQUIRE(got.size() == std::min<std::size_t>(4, all.size()));
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == all[i]);
    }
  }

  TEST_CASE("only reachable station carries every EV alternative") {
    json j = testsupport::parallel_roads(0);
    // 1 -> 2 -> 3 with a bypass 1 -> 3; a second station on an isolated node
    j["traffic"]["nodes"] = {1, 2, 3, 4};
    j["traffic"]["roads"] = {testsupport::road(1, 1, 2, 5, 2000), testsupport::road(2, 2, 3, 5, 2000),
                             testsupport::road(3, 1, 3, 8, 2000), testsupport::road(4, 4, 1, 5, 2000)};
    j["traffic"]["evcs"] = {testsupport::station(1, 2, 20, 1000), testsupport::station(2, 4, 20, 1000)};
    j["coupling"] = {{{"evcs", 1}, {"bus", 1}}, {{"evcs", 2}, {"bus", 1}}};
    j["traffic"]["od_pairs"] = {testsupport::od(1, 1, 3, 0, 300)};
    const CoupledInstance inst = testsupport::make(j);
    const PathSet ps = enumerate_paths(inst, 4);
    int ev = 0;
    for (const PathAlt& p : ps.paths) {
      if (p.cls != VehicleClass::Ev) continue;
      ++ev;
      CHECK(p.evcs == 0);
    }
    CHECK(ev == 1);
  }

  TEST_CASE("positive demand without an alternative names the pair") {
    json j = testsupport::parallel_roads(100);
    j["traffic"]["od_pairs"] = {testsupport::od(7, 2, 1, 100, 0)};
    const CoupledInstance inst = testsupport::make(j);
    try {
      enumerate_paths(inst, 3);
      FAIL("expected infeasibility");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Infeasible);
      CHECK(contains(e.what(), "od_pair 7"));
    }
  }

  TEST_CASE("incidence is consistent on the bundled path set") {
    const CoupledInstance inst = load_instance(testsupport::bundled_path());
    const PathSet ps = enumerate_paths(inst, 6);
    const Incidence inc = build_incidence(inst, ps);
    std::vector<int> road_count(ps.paths.size(), 0);
    for (const auto& users : inc.road_paths)
      for (int p : users) ++road_count[p];
    std::vector<int> od_count(ps.paths.size(), 0);
    for (const auto& users : inc.od_class_paths)
      for (int p : users) ++od_count[p];
    std::vector<int> station_count(ps.paths.size(), 0);
    for (const auto& users : inc.station_paths)
      for (int p : users) ++station_count[p];
    for (const PathAlt& p : ps.paths) {
      CHECK(road_count[p.id] == static_cast<int>(p.roads.size()));
      CHECK(od_count[p.id] == 1);
      CHECK(station_count[p.id] == (p.cls == VehicleClass::Ev ? 1 : 0));
      // connected walk from origin to destination through the station node
      const OdPair& od = inst.od_pairs[p.od];
      int at = od.origin;
      bool visited_station = p.evcs < 0;
      std::set<int> nodes{at};
      for (int a : p.roads) {
        CHECK(inst.roads[a].tail == at);
        at = inst.roads[a].head;
        CHECK(nodes.insert(at).second);
        if (p.evcs >= 0 && at == inst.evcs[p.evcs].node) visited_station = true;
      }
      CHECK(at == od.destination);
      CHECK(visited_station);
    }
  }
}
