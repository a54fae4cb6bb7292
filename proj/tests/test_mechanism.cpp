#include <cmath>

#include "doctest.h"
#include "ptcoord/error.hpp"
#include "ptcoord/mechanism.hpp"
#include "support.hpp"

using namespace ptcoord;
using testsupport::json;

namespace {

SweepPoint point(double alpha, double psi, bool accepted = true) {
  SweepPoint p;
  p.alpha = alpha;
  p.psi = psi;
  p.accepted = accepted;
  p.status = accepted ? milp::SolveStatus::Optimal : milp::SolveStatus::GapLimit;
  return p;
}

SweepPoint with_costs(double alpha, double gamma, double eta, double gamma0, double eta0) {
  SweepPoint p;
  p.alpha = alpha;
  p.gamma = gamma;
  p.eta = eta;
  p.accepted = true;
  p.status = milp::SolveStatus::Optimal;
  account(p, gamma0, eta0);
  return p;
}

}  // namespace

TEST_SUITE("accounting") {
  TEST_CASE("reported case arithmetic") {
    const SweepPoint p = with_costs(0.2, 164270, 180447, 162672, 201621);
    CHECK(p.alpha * p.delta_eta == doctest::Approx(4234.8));
    CHECK(p.psi == doctest::Approx(184681.8));
    CHECK(p.h == doctest::Approx(160035.2));
  }

  TEST_CASE("identities hold on arbitrary values") {
    for (double a : {0.0, 0.13, 0.5, 1.0}) {
      const SweepPoint p = with_costs(a, 1234.5, 987.25, 1200.0, 1100.0);
      const double scale = 1e-9 * std::max(std::abs(p.psi), std::abs(p.h));
      CHECK(std::abs(p.psi + p.h - (p.gamma + p.eta)) <= scale);
      CHECK(std::abs(p.psi - (1100.0 - (1 - a) * p.delta_eta)) <= scale);
      CHECK(std::abs(p.h - (1200.0 - p.tn_net_profit)) <= scale);
      CHECK(p.pdn_net_profit == doctest::Approx((1 - a) * (1100.0 - 987.25)));
    }
  }
}

TEST_SUITE("ratio selection") {
  TEST_CASE("explicit argmin") {
    const std::vector<SweepPoint> pts{point(0.1, 190000), point(0.2, 185000), point(0.3, 186000)};
    CHECK(pts[select_alpha_star(pts)].alpha == 0.2);
  }

  TEST_CASE("flat tail resolves to the smallest ratio") {
    std::vector<SweepPoint> pts{point(0.2, 200000)};
    for (int i = 3; i <= 10; ++i) pts.push_back(point(i / 10.0, 150000));
    CHECK(pts[select_alpha_star(pts)].alpha == doctest::Approx(0.3));
  }

  TEST_CASE("flagged points are skipped and none is an error") {
    std::vector<SweepPoint> pts{point(0.1, 100, false), point(0.2, 200)};
    CHECK(select_alpha_star(pts) == 1);
    pts[1].accepted = false;
    CHECK_THROWS_AS(select_alpha_star(pts), Error);
  }
}

TEST_SUITE("diagnostics") {
  TEST_CASE("plateau at the kink of a decreasing then flat curve") {
    std::vector<SweepPoint> pts;
    const double eta0 = 1000, gamma0 = 500;
    const std::vector<double> etas{1000, 950, 900, 880, 880, 880};
    for (std::size_t i = 0; i < etas.size(); ++i) {
      SweepPoint p = with_costs(0.2 * i, gamma0 + (1000 - etas[i]) * 0.1, etas[i], gamma0, eta0);
      p.dispatch.output = {i >= 3 ? 0.0 : 5.0, 40.0};
      pts.push_back(p);
    }
    const Diagnostics d = diagnostics(pts, 1);
    CHECK(d.plateau_index == 3);
    CHECK(d.plateau_alpha == doctest::Approx(0.6));
    CHECK(d.local_generation_zero);
    CHECK(d.overall_nonincreasing);
    CHECK(d.strict_savings == 5);
  }

  TEST_CASE("two identical points give a zero-width plateau at the first") {
    std::vector<SweepPoint> pts{with_costs(0.4, 10, 90, 10, 100), with_costs(0.5, 10, 90, 10, 100)};
    const Diagnostics d = diagnostics(pts, 0);
    CHECK(d.plateau_index == 0);
  }

  TEST_CASE("rising overall cost is reported") {
    std::vector<SweepPoint> pts{with_costs(0.0, 10, 100, 10, 100), with_costs(0.5, 30, 95, 10, 100),
                                with_costs(1.0, 40, 50, 10, 100)};
    CHECK_FALSE(diagnostics(pts, 0).overall_nonincreasing);
  }
}

TEST_SUITE("grids") {
  TEST_CASE("default grid has 21 exact points") {
    const auto g = make_alpha_grid(0, 1, 0.05);
    REQUIRE(g.size() == 21);
    CHECK(g[3] == 0.15);
    CHECK(g.back() == 1.0);
  }

  TEST_CASE("unsorted, duplicate and out-of-range grids are rejected") {
    CHECK_THROWS_AS(check_alpha_grid({0.2, 0.1}), Error);
    CHECK_THROWS_AS(check_alpha_grid({0.2, 0.2}), Error);
    CHECK_THROWS_AS(check_alpha_grid({0.5, 1.2}), Error);
    CHECK_THROWS_AS(check_alpha_grid({}), Error);
  }
}

TEST_SUITE("protocol") {
  TEST_CASE("zero demand baseline pays only conventional load") {
    json j = testsupport::bundled_json();
    for (auto& od : j["traffic"]["od_pairs"]) {
      od["gv_demand_veh_h"] = 0;
      od["ev_demand_veh_h"] = 0;
    }
    const CoupledInstance inst = testsupport::make(j);
    const PathSet ps = enumerate_paths(inst, 6);
    const PreScheduleResult r = pre_schedule(inst, ps);
    CHECK(r.gamma0 == doctest::Approx(0));
    const DispatchSolve d = solve_dispatch(assemble_dispatch_lp(inst, std::vector<double>(6, 0.0)));
    CHECK(r.eta0 == doctest::Approx(d.decision.eta));
  }

  TEST_CASE("small coupled instance honours the mechanism invariants") {
    const CoupledInstance inst = testsupport::make(testsupport::random_instance(7));
    const PathSet ps = enumerate_paths(inst, 4);
    const SweepResult res = sweep(inst, ps, {0.0, 0.5, 1.0});
    REQUIRE(res.points.size() == 3);
    const double g0 = res.pre.gamma0, e0 = res.pre.eta0;
    for (const SweepPoint& p : res.points) {
      CAPTURE(p.alpha);
      CAPTURE(p.note);
      REQUIRE(p.accepted);
      CHECK(p.delta_eta >= -1e-6 * std::max(1.0, e0));
      CHECK(p.delta_gamma >= -1e-6 * std::max(1.0, g0));
      CHECK(p.tn_net_profit >= -1e-6 * std::max(1.0, g0));
      CHECK(p.psi <= e0 + 1e-6 * e0);
      CHECK(p.oracle_rel_diff <= 1e-5);
    }
    CHECK(res.points[0].gamma == doctest::Approx(g0).epsilon(1e-6));
  }

  TEST_CASE("single-point grid reproduces the baseline") {
    const CoupledInstance inst = testsupport::make(testsupport::random_instance(3));
    const PathSet ps = enumerate_paths(inst, 4);
    const SweepResult res = sweep(inst, ps, {0.0});
    REQUIRE(res.points.size() == 1);
    CHECK(res.points[0].accepted);
    CHECK(res.points[0].gamma == doctest::Approx(res.pre.gamma0).epsilon(1e-6));
    CHECK(res.points[0].delta_eta >= -1e-6 * std::max(1.0, res.pre.eta0));
  }
}
