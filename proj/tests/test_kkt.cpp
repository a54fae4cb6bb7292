#include <cmath>

#include "doctest.h"
#include "ptcoord/dispatch.hpp"
#include "ptcoord/error.hpp"
#include "ptcoord/kkt.hpp"
#include "ptcoord/milp/branch_and_bound.hpp"
#include "support.hpp"

using namespace ptcoord;
using namespace ptcoord::milp;

namespace {

const std::vector<double> kLoads{13.1, 38.1, 64.7, 69.7, 48.1, 6.3};

int find_dual(const KktSystem& k, const std::string& name) {
  for (std::size_t i = 0; i < k.duals.size(); ++i)
    if (k.duals[i].name == name) return static_cast<int>(i);
  return -1;
}

double coef_of(const KktSystem::Stationarity& s, int dual) {
  double c = 0.0;
  for (const Term& t : s.duals)
    if (t.var == dual) c += t.coef;
  return c;
}

}  // namespace

TEST_SUITE("kkt derivation") {
  TEST_CASE("single lower row") {
    Model m;
    const int v = m.add_variable("v", -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    m.add_constraint("floor", LinExpr::var(v), RowSense::GreaterEqual, 3);
    m.set_objective(LinExpr::var(v));
    const CanonicalLp lp = CanonicalLp::from_model(m);
    const KktSystem k = derive_kkt(lp);
    REQUIRE(k.stationarity.size() == 1);
    REQUIRE(k.duals.size() == 1);
    REQUIRE(k.pairs.size() == 1);
    // 1 - mu = 0
    CHECK(k.stationarity[0].cost == 1.0);
    CHECK(coef_of(k.stationarity[0], 0) == -1.0);
    // residual -3 + v
    CHECK(k.pairs[0].constant == -3.0);
    REQUIRE(k.pairs[0].terms.size() == 1);
    CHECK(k.pairs[0].terms[0].coef == 1.0);
    const KktAudit a = audit_kkt(lp, k, {3.0}, {1.0}, {});
    CHECK(a.stationarity == 0.0);
    CHECK(a.complementarity == 0.0);
    CHECK(a.primal == 0.0);
    CHECK(a.duality_gap_rel == doctest::Approx(0.0));
    // any other point breaks a condition
    CHECK(audit_kkt(lp, k, {4.0}, {1.0}, {}).complementarity > 0.0);
    CHECK(audit_kkt(lp, k, {3.0}, {0.5}, {}).stationarity > 0.0);
  }

  TEST_CASE("equalities alone yield no complementarity") {
    CanonicalLp lp;
    const double inf = CanonicalLp::kInf;
    lp.cols.push_back({"a", 2.0, -inf, inf});
    lp.cols.push_back({"b", 3.0, -inf, inf});
    CanonicalLp::Row r;
    r.name = "sum";
    r.terms = {{0, 1.0}, {1, 1.0}};
    r.rhs = 4.0;
    lp.equalities.push_back(r);
    const KktSystem k = derive_kkt(lp);
    CHECK(k.pairs.empty());
    CHECK(k.count(DualKind::Equality) == 1);
    CHECK(coef_of(k.stationarity[0], 0) == 1.0);
    CHECK(coef_of(k.stationarity[1], 0) == 1.0);
  }

  TEST_CASE("rows without terms are rejected") {
    CanonicalLp lp;
    lp.cols.push_back({"a", 1.0, 0.0, 1.0});
    CanonicalLp::Row r;
    r.name = "empty";
    lp.inequalities.push_back(r);
    CHECK_THROWS_AS(derive_kkt(lp), Error);
  }

  TEST_CASE("dispatch system has the expected structure") {
    const CoupledInstance inst = load_instance(testsupport::bundled_path());
    const DispatchLp d = assemble_dispatch_lp(inst, kLoads);
    const KktSystem k = derive_kkt(d.lp);
    const int buses = static_cast<int>(inst.buses.size()), lines = static_cast<int>(inst.lines.size());
    const int units = static_cast<int>(inst.generators.size()) + 1;
    int supports = 0;
    for (const auto& rows : d.unit_support_rows) supports += static_cast<int>(rows.size());

    CHECK(k.stationarity.size() == d.lp.cols.size());
    CHECK(k.count(DualKind::Equality) == 1 + buses + lines);
    CHECK(k.count(DualKind::Inequality) == supports);
    // output bounds per unit, flow limits per line, angle bounds per non-reference bus
    CHECK(k.count(DualKind::Lower) == units + lines + buses - 1);
    CHECK(k.count(DualKind::Upper) == units + lines + buses - 1);
    CHECK(k.count(DualKind::Fixed) == 1);
    CHECK(k.pairs.size() == static_cast<std::size_t>(supports + 2 * (units + lines + buses - 1)));

    // eta row: 1 + lambda_eta = 0
    const int lam_eta = find_dual(k, "lambda_eta_def");
    REQUIRE(lam_eta >= 0);
    CHECK(coef_of(k.stationarity[d.eta], lam_eta) == 1.0);
    // cost epigraph: -lambda_eta - sum mu_support = 0
    for (int u = 0; u < units; ++u) {
      const auto& s = k.stationarity[d.unit_cost[u]];
      CHECK(s.cost == 0.0);
      CHECK(coef_of(s, lam_eta) == -1.0);
      for (int row : d.unit_support_rows[u])
        CHECK(coef_of(s, find_dual(k, "mu_" + d.lp.inequalities[row].name)) == -1.0);
    }
    // angle columns: the line multipliers enter through the bus-by-line
    // incidence (from +1, to -1 in the law), not its transpose
    for (int b = 0; b < buses; ++b) {
      const auto& s = k.stationarity[d.bus_angle[b]];
      for (int l = 0; l < lines; ++l) {
        const int lam = find_dual(k, "lambda_dc_" + std::to_string(inst.lines[l].id));
        double expect = 0.0;
        if (inst.bus_index(inst.lines[l].from) == b) expect = -1.0;
        if (inst.bus_index(inst.lines[l].to) == b) expect = 1.0;
        CHECK(coef_of(s, lam) == expect);
      }
    }
    // line-flow columns: balance rows of both ends plus the reactance
    for (int l = 0; l < lines; ++l) {
      const auto& s = k.stationarity[d.line_flow[l]];
      const Line& line = inst.lines[l];
      CHECK(coef_of(s, find_dual(k, "lambda_balance_" + std::to_string(line.from))) == -1.0);
      CHECK(coef_of(s, find_dual(k, "lambda_balance_" + std::to_string(line.to))) == 1.0);
      CHECK(coef_of(s, find_dual(k, "lambda_dc_" + std::to_string(line.id))) == doctest::Approx(line.reactance));
    }
  }
}

TEST_SUITE("kkt embedding") {
  TEST_CASE("embedded dispatch reproduces the direct optimum") {
    const CoupledInstance inst = load_instance(testsupport::bundled_path());
    const DispatchLp d = assemble_dispatch_lp(inst, kLoads);
    const KktSystem k = derive_kkt(d.lp);
    Model m;
    std::vector<LinExpr> params;
    for (double p : kLoads) params.emplace_back(p);
    const KktEmbedding emb = embed_kkt(m, d.lp, k, params, "dn_", 1.1, 1.0);
    // any KKT point is optimal, so a zero objective must still give the optimum
    m.set_objective(LinExpr(0.0));
    const Solution s = solve_milp(m);
    REQUIRE(s.status == SolveStatus::Optimal);
    const double eta = s.values[emb.primal[d.eta]];
    const double direct = solve_dispatch(d).decision.eta;
    CHECK(std::abs(eta - direct) <= 1e-6 * direct);
    const KktAudit a = audit_kkt(d.lp, k, emb.primal_values(s.values), emb.dual_values(s.values), kLoads);
    CHECK(a.stationarity <= 1e-7);
    CHECK(a.complementarity <= 1e-6);
    CHECK(a.dual_sign <= 1e-9);
    CHECK(a.duality_gap_rel <= 1e-5);
    const std::vector<double> duals = emb.dual_values(s.values);
    CHECK(duals[find_dual(k, "lambda_eta_def")] == doctest::Approx(-1.0));
  }

  TEST_CASE("sharing ratio outside the unit interval is rejected") {
    const CoupledInstance inst = testsupport::make(testsupport::parallel_roads(100));
    const PathSet ps = enumerate_paths(inst, 2);
    CHECK_THROWS_AS(assemble_single_level(inst, ps, 1.5, 0.0), Error);
    CHECK_THROWS_AS(assemble_single_level(inst, ps, -0.1, 0.0), Error);
  }
}
