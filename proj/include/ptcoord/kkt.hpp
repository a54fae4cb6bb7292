#pragma once

#include <string>
#include <vector>

#include "ptcoord/canonical_lp.hpp"
#include "ptcoord/dispatch.hpp"
#include "ptcoord/linearization.hpp"
#include "ptcoord/milp/model.hpp"
#include "ptcoord/network.hpp"
#include "ptcoord/traffic.hpp"

namespace ptcoord {

enum class DualKind : unsigned char { Equality, Inequality, Lower, Upper, Fixed };

/// Optimality conditions of a canonical LP:
///   c + A_eq' lambda + A_in' mu - mu_lo + mu_hi + nu = 0,
///   0 <= mu perp (b_in - A_in v) >= 0, 0 <= mu_lo perp (v - lo) >= 0,
///   0 <= mu_hi perp (hi - v) >= 0, lambda and nu free.
struct KktSystem {
  struct Dual {
    std::string name;
    DualKind kind = DualKind::Equality;
    int ref = 0;         // row index (Equality/Inequality) or column index
    bool signed_free = false;
    double limit = CanonicalLp::kInf;  // big-M policy bound on |value|
  };
  struct Stationarity {
    int col = 0;
    double cost = 0.0;
    std::vector<milp::Term> duals;  // (dual index, coefficient)
  };
  struct Pair {
    int dual = 0;
    std::vector<milp::Term> terms;   // residual = constant + terms(v) + params(p) >= 0
    std::vector<milp::Term> params;
    double constant = 0.0;
  };

  std::vector<Dual> duals;
  std::vector<Stationarity> stationarity;  // one per column
  std::vector<Pair> pairs;                 // one per inequality and finite bound

  int count(DualKind kind) const;
};

/// Mechanical derivation from the LP data. Throws Validation on rows without
/// terms, non-finite right-hand sides or crossed bounds.
KktSystem derive_kkt(const CanonicalLp& lp);

struct KktAudit {
  double stationarity = 0.0;     // max |row|
  double complementarity = 0.0;  // max min(multiplier, slack)
  double primal = 0.0;           // max primal infeasibility
  double dual_sign = 0.0;        // max negative part of sign-constrained multipliers
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double duality_gap_rel = 0.0;  // |primal - dual| / max(1, |primal|)
};

KktAudit audit_kkt(const CanonicalLp& lp, const KktSystem& kkt, const std::vector<double>& v,
                   const std::vector<double>& duals, const std::vector<double>& params);

/// Model variables created when the KKT system is embedded in a MILP.
struct KktEmbedding {
  std::vector<int> primal;  // model variable per LP column
  std::vector<int> dual;    // model variable per dual
  std::vector<BigMPair> pairs;

  std::vector<double> primal_values(const std::vector<double>& x) const;
  std::vector<double> dual_values(const std::vector<double>& x) const;
};

/// Adds primal copies (boxed by implied bounds), primal rows with the
/// parameters replaced by expressions, dual variables bounded by the policy
/// limits, stationarity rows and big-M linearized complementarity.
KktEmbedding embed_kkt(milp::Model& model, const CanonicalLp& lp, const KktSystem& kkt,
                       const std::vector<milp::LinExpr>& params, const std::string& prefix, double safety,
                       double m_scale);

struct SingleLevelOptions {
  double m_scale = 1.0;
};

/// Re-scheduling problem for a fixed sharing ratio: min Gamma - alpha (eta0 - eta)
/// over the equilibrium block and the KKT system of the dispatch LP, with the
/// charging loads coupled to the station flows.
struct SingleLevel {
  milp::Model model;
  UeBlock ue;
  DispatchLp dispatch;
  KktSystem kkt;
  KktEmbedding emb;
  double alpha = 0.0;
  double eta0 = 0.0;

  int eta_var() const { return emb.primal[dispatch.eta]; }
  std::vector<BigMPair> all_pairs() const;
};

SingleLevel assemble_single_level(const CoupledInstance& inst, const PathSet& ps, double alpha, double eta0,
                                  const SingleLevelOptions& opt = {});

}  // namespace ptcoord
