#include <cmath>

#include "doctest.h"
#include "ptcoord/error.hpp"
#include "ptcoord/mechanism.hpp"
#include "ptcoord/traffic.hpp"
#include "support.hpp"

using namespace ptcoord;
using testsupport::json;

namespace {

Road road_min(double t0_min, double cap) {
  Road r;
  r.free_flow_time = t0_min / 60.0;
  r.capacity = cap;
  return r;
}

Evcs station_min(double t0_min, double cap) {
  Evcs s;
  s.base_service_time = t0_min / 60.0;
  s.capacity = cap;
  return s;
}

double tol_for(double gamma) { return 1e-5 * std::max(1.0, gamma); }

}  // namespace

TEST_SUITE("delay curves") {
  TEST_CASE("BPR values") {
    const Road r = road_min(10, 20);
    CHECK(bpr_time(0, r) * 60 == doctest::Approx(10));
    CHECK(bpr_time(20, r) * 60 == doctest::Approx(11.5));
    CHECK(bpr_time(10, r) * 60 == doctest::Approx(10.09375));
    CHECK_THROWS_AS(bpr_time(-1, r), Error);
  }

  TEST_CASE("Davidson values and domain") {
    const Evcs s = station_min(30, 12);
    GlobalParams gp;
    CHECK(davidson_time(0, s, gp) * 60 == doctest::Approx(30));
    CHECK(davidson_time(6, s, gp) * 60 == doctest::Approx(1.15 * 30));
    CHECK_THROWS_AS(davidson_time(0.99 * 12, s, gp), Error);
  }

  TEST_CASE("curves are nondecreasing over their domains") {
    const Road r = road_min(7, 13);
    const Evcs s = station_min(25, 9);
    GlobalParams gp;
    double prev_r = 0, prev_s = 0;
    for (int i = 0; i <= 400; ++i) {
      const double tr = bpr_time(13.0 * i / 400, r);
      const double ts = davidson_time(0.95 * 9.0 * i / 400, s, gp);
      CHECK(tr >= prev_r);
      CHECK(ts >= prev_s);
      prev_r = tr;
      prev_s = ts;
    }
  }

  TEST_CASE("charging load conversion") {
    GlobalParams gp;
    const auto p = charging_load({0.0, 0.48, 12.0}, gp);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == doctest::Approx(4.8));
    CHECK(p[2] == doctest::Approx(120.0));
  }
}

TEST_SUITE("equilibrium block") {
  TEST_CASE("bundled block size follows the closed-form count") {
    const CoupledInstance inst = load_instance(testsupport::bundled_path());
    const PathSet ps = enumerate_paths(inst, 6);
    const PreScheduleModel pm = assemble_pre_schedule(inst, ps);
    const int P = static_cast<int>(ps.paths.size());
    const int A = static_cast<int>(inst.roads.size());
    const int M = static_cast<int>(inst.evcs.size());
    const int N = inst.params.road_segments;
    int U = 0;  // (od, class) combinations with alternatives
    const Incidence inc = build_incidence(inst, ps);
    for (const auto& v : inc.od_class_paths) U += !v.empty();
    int B = 0;  // pairs that keep a switch
    for (const BigMPair& p : pm.ue.pairs) B += p.binary >= 0;
    CHECK(pm.model.num_vars() == P + (A + M) * (2 * N) + U + B);
    CHECK(pm.model.num_rows() == (A + M) * (2 * N - 1) + U + 3 * B + (P - B));
    CHECK(pm.model.num_binaries() == (A + M) * (N - 1) + B);
    CHECK(pm.model.num_vars() == 301);
    CHECK(pm.model.num_rows() == 294);
  }

  TEST_CASE("toll ceiling defaults to ten times the longest valued route time") {
    json j = testsupport::parallel_roads(100, 10, 16);
    j["params"].erase("toll_max_cny");
    const CoupledInstance inst = testsupport::make(j);
    const PathSet ps = enumerate_paths(inst, 2);
    CHECK(toll_bound(inst, ps) == doctest::Approx(10 * 100 * 16.0 / 60.0));
  }
}

TEST_SUITE("equilibrium solves") {
  TEST_CASE("one alternative pins the O-D cost to its path cost") {
    json j = testsupport::parallel_roads(500);
    j["traffic"]["roads"] = {testsupport::road(1, 1, 2, 10, 2000)};
    const CoupledInstance inst = testsupport::make(j);
    const PathSet ps = enumerate_paths(inst, 3);
    const PreScheduleResult r = pre_schedule(inst, ps);
    REQUIRE(ps.paths.size() == 1);
    CHECK(r.traffic.od_cost[0] == doctest::Approx(r.traffic.path_cost[0]));
    CHECK(r.traffic.path_flow[0] == doctest::Approx(5.0));
    CHECK(r.wardrop.ok());
  }

  TEST_CASE("zero demand gives zero flows and zero travel cost") {
    const CoupledInstance inst = testsupport::make(testsupport::parallel_roads(0));
    const PathSet ps = enumerate_paths(inst, 3);
    const PreScheduleResult r = pre_schedule(inst, ps);
    CHECK(r.gamma0 == doctest::Approx(0));
    for (double f : r.traffic.path_flow) CHECK(f == doctest::Approx(0));
  }

  TEST_CASE("identical parallel roads split evenly and pass verification") {
    const CoupledInstance inst = testsupport::make(testsupport::parallel_roads(1000));
    const PathSet ps = enumerate_paths(inst, 3);
    const PreScheduleResult r = pre_schedule(inst, ps);
    REQUIRE(r.traffic.path_flow.size() == 2);
    CHECK(r.traffic.path_flow[0] == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(r.traffic.path_flow[1] == doctest::Approx(5.0).epsilon(1e-6));
    const WardropReport w = verify_wardrop(inst, ps, r.traffic, tol_for(r.gamma0));
    CHECK(w.ok());
    CHECK(w.identity_residual <= 1e-6 * w.identity_scale);
  }

  TEST_CASE("a used path priced above the O-D cost is flagged") {
    const CoupledInstance inst = testsupport::make(testsupport::parallel_roads(1000));
    const PathSet ps = enumerate_paths(inst, 3);
    const PreScheduleResult r = pre_schedule(inst, ps);
    TrafficDecision bad = r.traffic;
    const double tol = tol_for(r.gamma0);
    bad.path_cost[0] += 10 * tol;
    CHECK_FALSE(verify_wardrop(inst, ps, bad, tol).ok());
    TrafficDecision under = r.traffic;
    under.path_cost[1] -= 10 * tol;
    CHECK_FALSE(verify_wardrop(inst, ps, under, tol).ok());
  }

  TEST_CASE("bundled baseline passes every audit and conserves demand") {
    const CoupledInstance inst = load_instance(testsupport::bundled_path());
    const PathSet ps = enumerate_paths(inst, 6);
    const PreScheduleResult r = pre_schedule(inst, ps);
    CHECK(r.wardrop.ok());
    CHECK(r.big_m.clean());
    CHECK(r.fill_order_ok);
    const TrafficDecision& t = r.traffic;
    for (std::size_t o = 0; o < inst.od_pairs.size(); ++o) {
      double gv = 0, ev = 0;
      for (const PathAlt& p : ps.paths)
        if (p.od == static_cast<int>(o)) (p.cls == VehicleClass::Ev ? ev : gv) += t.path_flow[p.id];
      CHECK(gv == doctest::Approx(inst.od_pairs[o].gv_demand).epsilon(1e-9));
      CHECK(ev == doctest::Approx(inst.od_pairs[o].ev_demand).epsilon(1e-9));
    }
    for (std::size_t a = 0; a < inst.roads.size(); ++a) {
      CHECK(t.road_flow[a] == doctest::Approx(t.road_flow_gv[a] + t.road_flow_ev[a]));
      CHECK(t.road_flow[a] <= inst.roads[a].capacity + 1e-9);
    }
    for (std::size_t m = 0; m < inst.evcs.size(); ++m) {
      CHECK(t.station_flow[m] <= inst.params.davidson_fraction * inst.evcs[m].capacity + 1e-9);
      CHECK(t.charging_load[m] == doctest::Approx(10.0 * t.station_flow[m]));
    }
    for (double v : t.road_toll) CHECK(v >= -1e-9);
    for (double v : t.station_fee) CHECK(v >= -1e-9);
    for (const PathAlt& p : ps.paths) {
      const double slack = t.path_cost[p.id] - t.od_cost[2 * p.od + (p.cls == VehicleClass::Ev)];
      CHECK(std::min(t.path_flow[p.id], slack) <= 1e-6 * std::max(1.0, r.gamma0));
    }
  }

  TEST_CASE("overloaded pair is named") {
    json j = testsupport::parallel_roads(0, 10, 10, 100);
    j["traffic"]["od_pairs"] = {testsupport::od(4, 1, 2, 150, 0), testsupport::od(9, 1, 2, 500, 0)};
    const CoupledInstance inst = testsupport::make(j);
    const PathSet ps = enumerate_paths(inst, 3);
    CHECK(overloaded_od_pairs(inst, ps) == std::vector<int>{1});
    try {
      pre_schedule(inst, ps);
      FAIL("expected infeasibility");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Infeasible);
      CHECK(std::string(e.what()).find("od_pair 9") != std::string::npos);
    }
  }
}
