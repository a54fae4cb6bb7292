#include "ptcoord/kkt.hpp"

#include <algorithm>
#include <cmath>

#include "ptcoord/error.hpp"

namespace ptcoord {

using milp::LinExpr;
using milp::RowSense;

int KktSystem::count(DualKind kind) const {
  return static_cast<int>(std::count_if(duals.begin(), duals.end(), [&](const Dual& d) { return d.kind == kind; }));
}

KktSystem derive_kkt(const CanonicalLp& lp) {
  KktSystem k;
  const int n = static_cast<int>(lp.cols.size());
  k.stationarity.resize(n);
  for (int j = 0; j < n; ++j) {
    const CanonicalLp::Column& c = lp.cols[j];
    if (c.lower > c.upper || std::isnan(c.lower) || std::isnan(c.upper))
      fail(ErrorKind::Validation, "KKT: column '" + c.name + "' has crossed bounds");
    k.stationarity[j].col = j;
    k.stationarity[j].cost = c.cost;
  }
  auto check_row = [&](const CanonicalLp::Row& r) {
    if (r.terms.empty()) fail(ErrorKind::Validation, "KKT: row '" + r.name + "' has no terms");
    if (!std::isfinite(r.rhs)) fail(ErrorKind::Validation, "KKT: row '" + r.name + "' is free");
    for (const milp::Term& t : r.terms)
      if (t.var < 0 || t.var >= n) fail(ErrorKind::Validation, "KKT: row '" + r.name + "' references a missing column");
  };
  auto add_dual = [&](std::string name, DualKind kind, int ref, bool free, double limit) {
    k.duals.push_back({std::move(name), kind, ref, free, limit});
    return static_cast<int>(k.duals.size()) - 1;
  };

  for (std::size_t i = 0; i < lp.equalities.size(); ++i) {
    const CanonicalLp::Row& r = lp.equalities[i];
    check_row(r);
    const int d = add_dual("lambda_" + r.name, DualKind::Equality, static_cast<int>(i), true, r.dual_limit);
    for (const milp::Term& t : r.terms) k.stationarity[t.var].duals.push_back({d, t.coef});
  }
  for (std::size_t i = 0; i < lp.inequalities.size(); ++i) {
    const CanonicalLp::Row& r = lp.inequalities[i];
    check_row(r);
    const int d = add_dual("mu_" + r.name, DualKind::Inequality, static_cast<int>(i), false, r.dual_limit);
    KktSystem::Pair p{d, {}, r.rhs_params, r.rhs};
    for (const milp::Term& t : r.terms) {
      k.stationarity[t.var].duals.push_back({d, t.coef});
      p.terms.push_back({t.var, -t.coef});
    }
    k.pairs.push_back(std::move(p));
  }
  for (int j = 0; j < n; ++j) {
    const CanonicalLp::Column& c = lp.cols[j];
    if (std::isfinite(c.lower) && c.lower == c.upper) {
      const int d = add_dual("nu_" + c.name, DualKind::Fixed, j, true, c.bound_dual_limit);
      k.stationarity[j].duals.push_back({d, 1.0});
      continue;
    }
    if (std::isfinite(c.lower)) {
      const int d = add_dual("mulo_" + c.name, DualKind::Lower, j, false, c.bound_dual_limit);
      k.stationarity[j].duals.push_back({d, -1.0});
      k.pairs.push_back({d, {{j, 1.0}}, {}, -c.lower});
    }
    if (std::isfinite(c.upper)) {
      const int d = add_dual("muhi_" + c.name, DualKind::Upper, j, false, c.bound_dual_limit);
      k.stationarity[j].duals.push_back({d, 1.0});
      k.pairs.push_back({d, {{j, -1.0}}, {}, c.upper});
    }
  }
  return k;
}

KktAudit audit_kkt(const CanonicalLp& lp, const KktSystem& kkt, const std::vector<double>& v,
                   const std::vector<double>& duals, const std::vector<double>& params) {
  KktAudit a;
  for (const auto& s : kkt.stationarity) {
    double r = s.cost;
    for (const milp::Term& t : s.duals) r += t.coef * duals[t.var];
    a.stationarity = std::max(a.stationarity, std::abs(r));
  }
  for (const auto& p : kkt.pairs) {
    double slack = p.constant;
    for (const milp::Term& t : p.terms) slack += t.coef * v[t.var];
    for (const milp::Term& t : p.params) slack += t.coef * params[t.var];
    const double mu = duals[p.dual];
    a.primal = std::max(a.primal, -slack);
    a.complementarity = std::max(a.complementarity, std::min(std::max(mu, 0.0), std::max(slack, 0.0)));
  }
  for (std::size_t i = 0; i < kkt.duals.size(); ++i)
    if (!kkt.duals[i].signed_free) a.dual_sign = std::max(a.dual_sign, -duals[i]);
  for (const auto& r : lp.equalities) {
    double act = 0.0;
    for (const milp::Term& t : r.terms) act += t.coef * v[t.var];
    a.primal = std::max(a.primal, std::abs(act - lp.row_rhs(r, params)));
  }

  for (std::size_t j = 0; j < lp.cols.size(); ++j) a.primal_objective += lp.cols[j].cost * v[j];
  for (std::size_t i = 0; i < kkt.duals.size(); ++i) {
    const auto& d = kkt.duals[i];
    const double y = duals[i];
    switch (d.kind) {
      case DualKind::Equality: a.dual_objective -= y * lp.row_rhs(lp.equalities[d.ref], params); break;
      case DualKind::Inequality: a.dual_objective -= y * lp.row_rhs(lp.inequalities[d.ref], params); break;
      case DualKind::Lower: a.dual_objective += y * lp.cols[d.ref].lower; break;
      case DualKind::Upper: a.dual_objective -= y * lp.cols[d.ref].upper; break;
      case DualKind::Fixed: a.dual_objective -= y * lp.cols[d.ref].lower; break;
    }
  }
  a.duality_gap_rel = std::abs(a.primal_objective - a.dual_objective) / std::max(1.0, std::abs(a.primal_objective));
  return a;
}

std::vector<double> KktEmbedding::primal_values(const std::vector<double>& x) const {
  std::vector<double> v;
  v.reserve(primal.size());
  for (int j : primal) v.push_back(x[j]);
  return v;
}

std::vector<double> KktEmbedding::dual_values(const std::vector<double>& x) const {
  std::vector<double> v;
  v.reserve(dual.size());
  for (int j : dual) v.push_back(x[j]);
  return v;
}

KktEmbedding embed_kkt(milp::Model& model, const CanonicalLp& lp, const KktSystem& kkt,
                       const std::vector<LinExpr>& params, const std::string& prefix, double safety,
                       double m_scale) {
  if (static_cast<int>(params.size()) != lp.num_params) fail(ErrorKind::Validation, "KKT: parameter count mismatch");
  KktEmbedding emb;
  for (const CanonicalLp::Column& c : lp.cols) {
    const double lo = std::max(c.lower, c.implied_lower);
    const double hi = std::min(c.upper, c.implied_upper);
    emb.primal.push_back(model.add_variable(prefix + c.name, lo, hi));
  }
  auto row_expr = [&](const CanonicalLp::Row& r) {
    LinExpr e;
    for (const milp::Term& t : r.terms) e.add(emb.primal[t.var], t.coef);
    for (const milp::Term& t : r.rhs_params) e.add(params[t.var], -t.coef);
    return e;
  };
  for (const auto& r : lp.equalities) model.add_constraint(prefix + r.name, row_expr(r), RowSense::Equal, r.rhs);
  for (const auto& r : lp.inequalities) model.add_constraint(prefix + r.name, row_expr(r), RowSense::LessEqual, r.rhs);

  for (const auto& d : kkt.duals) {
    const double lo = d.signed_free ? -d.limit : 0.0;
    emb.dual.push_back(model.add_variable(prefix + d.name, lo, d.limit));
  }
  for (const auto& s : kkt.stationarity) {
    LinExpr e;
    for (const milp::Term& t : s.duals) e.add(emb.dual[t.var], t.coef);
    model.add_constraint(prefix + "stat_" + lp.cols[s.col].name, e, RowSense::Equal, -s.cost);
  }
  for (const auto& p : kkt.pairs) {
    BigMPair pair;
    pair.name = prefix + kkt.duals[p.dual].name;
    pair.f = LinExpr::var(emb.dual[p.dual]);
    LinExpr g(p.constant);
    for (const milp::Term& t : p.terms) g.add(emb.primal[t.var], t.coef);
    for (const milp::Term& t : p.params) g.add(params[t.var], t.coef);
    g.normalize();
    pair.g = std::move(g);
    big_m_linearize(model, pair, safety, m_scale);
    emb.pairs.push_back(std::move(pair));
  }
  return emb;
}

std::vector<BigMPair> SingleLevel::all_pairs() const {
  std::vector<BigMPair> all = ue.pairs;
  all.insert(all.end(), emb.pairs.begin(), emb.pairs.end());
  return all;
}

SingleLevel assemble_single_level(const CoupledInstance& inst, const PathSet& ps, double alpha, double eta0,
                                  const SingleLevelOptions& opt) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::Validation, "sharing ratio must lie in [0,1]");
  SingleLevel sl;
  sl.alpha = alpha;
  sl.eta0 = eta0;
  sl.ue = assemble_ue_block(sl.model, inst, ps, UeOptions{opt.m_scale});
  sl.dispatch = assemble_dispatch_lp(inst, std::vector<double>(inst.evcs.size(), 0.0));
  sl.kkt = derive_kkt(sl.dispatch.lp);
  sl.emb = embed_kkt(sl.model, sl.dispatch.lp, sl.kkt, sl.ue.station_load, "dn_", inst.params.big_m_safety,
                     opt.m_scale);
  // Gamma - alpha (eta0 - eta)
  LinExpr obj = sl.ue.gamma;
  obj.add(sl.eta_var(), alpha);
  obj.add_constant(-alpha * eta0);
  sl.model.set_objective(obj);
  return sl;
}

}  // namespace ptcoord
