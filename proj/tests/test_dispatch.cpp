#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "ptcoord/dispatch.hpp"
#include "support.hpp"

using namespace ptcoord;
using milp::SolveStatus;
using testsupport::json;

namespace {

double quad(const Generator& g, double p) { return g.a * p * p + g.b * p + g.c; }

Generator gen(double a, double b, double c, double pmin, double pmax) {
  Generator g;
  g.a = a;
  g.b = b;
  g.c = c;
  g.p_min = pmin;
  g.p_max = pmax;
  return g;
}

json one_bus(double demand, bool with_generator, double pmax = 100.0) {
  json j = testsupport::parallel_roads(0);
  j["power"] = testsupport::one_bus_power(demand);
  if (with_generator)
    j["power"]["generators"] = {{{"id", 1}, {"bus", 1}, {"a_cny_mw2h", 5.2}, {"b_cny_mwh", 200}, {"c_cny_h", 300},
                                 {"p_min_mw", 0}, {"p_max_mw", pmax}}};
  return j;
}

std::vector<double> station_loads(std::size_t n, double mw) { return std::vector<double>(n, mw); }

}  // namespace

TEST_SUITE("cost curves") {
  TEST_CASE("linear cost is a single exact segment") {
    const auto s = cost_pwl(gen(0, 200, 300, 0, 50), 4);
    REQUIRE(s.size() == 1);
    CHECK(s[0].slope == 200);
    CHECK(s[0].intercept == 300);
  }

  TEST_CASE("two chords of the quadratic") {
    const Generator g = gen(5.2, 200, 300, 0, 10);
    const auto s = cost_pwl(g, 2);
    REQUIRE(s.size() == 2);
    CHECK(s[0].slope == doctest::Approx(226));
    CHECK(s[1].slope == doctest::Approx(278));
    for (double p : {0.0, 5.0, 10.0}) {
      double v = -1e300;
      for (const auto& c : s) v = std::max(v, c.slope * p + c.intercept);
      CHECK(v == doctest::Approx(quad(g, p)));
    }
  }

  TEST_CASE("degenerate range is one fixed segment") {
    const Generator g = gen(5.2, 200, 300, 7, 7);
    const auto s = cost_pwl(g, 3);
    REQUIRE(s.size() == 1);
    CHECK(s[0].slope == 0);
    CHECK(s[0].intercept == doctest::Approx(quad(g, 7)));
  }
}

TEST_SUITE("dispatch") {
  TEST_CASE("substation alone serves one bus") {
    const CoupledInstance inst = testsupport::make(one_bus(10, false));
    const DispatchSolve s = solve_dispatch(assemble_dispatch_lp(inst, {0.0}));
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.decision.eta == doctest::Approx(4000));
  }

  TEST_CASE("generator output approaches the price-matching optimum") {
    const double p_star = (400.0 - 200.0) / (2 * 5.2);
    double prev_err = 1e9;
    for (int segs : {2, 8, 32, 128}) {
      json j = one_bus(50, true, 40);
      j["params"]["cost_segments"] = segs;
      const CoupledInstance inst = testsupport::make(j);
      const DispatchSolve s = solve_dispatch(assemble_dispatch_lp(inst, {0.0}));
      REQUIRE(s.status == SolveStatus::Optimal);
      const double err = std::abs(s.decision.output[0] - p_star);
      CHECK(err <= 40.0 / segs + 1e-9);
      CHECK(err <= prev_err + 1e-9);
      prev_err = err;
    }
    CHECK(prev_err < 0.5);
  }

  TEST_CASE("demand beyond supply is infeasible") {
    json j = one_bus(5000, true, 40);
    j["power"]["substation"]["import_max_mw"] = 100;
    const CoupledInstance inst = testsupport::make(j);
    CHECK(solve_dispatch(assemble_dispatch_lp(inst, {0.0})).status == SolveStatus::Infeasible);
  }

  TEST_CASE("no load leaves only the fixed costs") {
    json j = testsupport::bundled_json();
    for (auto& b : j["power"]["buses"]) b["demand_mw"] = 0;
    const CoupledInstance inst = testsupport::make(j);
    const DispatchSolve s = solve_dispatch(assemble_dispatch_lp(inst, station_loads(6, 0)));
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.decision.eta == doctest::Approx(300 + 340 + 330));
    for (double p : s.decision.output) CHECK(p == doctest::Approx(0).epsilon(1e-9));
  }

  TEST_CASE("bundled solve satisfies recomputed constraints") {
    const CoupledInstance inst = load_instance(testsupport::bundled_path());
    const std::vector<double> loads{13.1, 38.1, 64.7, 69.7, 48.1, 6.3};
    const DispatchLp lp = assemble_dispatch_lp(inst, loads);
    const DispatchSolve a = solve_dispatch(lp), b = solve_dispatch(lp);
    REQUIRE(a.status == SolveStatus::Optimal);
    CHECK(a.decision.eta == b.decision.eta);
    const DispatchResiduals r = dispatch_residuals(inst, loads, a.decision);
    CHECK(r.bus_balance <= 1e-7);
    CHECK(r.dc_law <= 1e-7);
    CHECK(r.bounds <= 1e-7);
    CHECK(r.eta_sum <= 1e-7 * std::max(1.0, a.decision.eta));
    // epigraph tight: F equals the upper envelope of its supports
    CHECK(std::abs(r.epigraph) <= 1e-7 * std::max(1.0, a.decision.eta));
    for (std::size_t k = 0; k < inst.generators.size(); ++k) {
      double env = -1e300;
      for (const auto& c : cost_pwl(inst.generators[k], inst.params.cost_segments))
        env = std::max(env, c.slope * a.decision.output[k] + c.intercept);
      CHECK(a.decision.cost[k] == doctest::Approx(env).epsilon(1e-9));
    }
    // reference bus angle and DC law in radians
    CHECK(a.decision.angle[inst.bus_index(inst.substation.bus)] == 0.0);
    for (std::size_t l = 0; l < inst.lines.size(); ++l) {
      const Line& line = inst.lines[l];
      const double dtheta = a.decision.angle[inst.bus_index(line.from)] - a.decision.angle[inst.bus_index(line.to)];
      CHECK(line.reactance * a.decision.line_flow[l] / inst.params.power_base == doctest::Approx(dtheta).epsilon(1e-7));
      CHECK(std::abs(a.decision.line_flow[l]) <= line.flow_limit + 1e-7);
    }
  }

  TEST_CASE("optimum is invariant to instance ordering") {
    json j = testsupport::bundled_json();
    const std::vector<double> loads{13.1, 38.1, 64.7, 69.7, 48.1, 6.3};
    const double eta = solve_dispatch(assemble_dispatch_lp(testsupport::make(j), loads)).decision.eta;
    auto& P = j["power"];
    std::reverse(P["buses"].begin(), P["buses"].end());
    std::reverse(P["lines"].begin(), P["lines"].end());
    std::reverse(P["generators"].begin(), P["generators"].end());
    const CoupledInstance perm = testsupport::make(j);
    const double eta2 = solve_dispatch(assemble_dispatch_lp(perm, loads)).decision.eta;
    CHECK(std::abs(eta - eta2) <= 1e-9 * eta);
  }
}
