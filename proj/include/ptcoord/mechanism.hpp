#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ptcoord/dispatch.hpp"
#include "ptcoord/kkt.hpp"
#include "ptcoord/linearization.hpp"
#include "ptcoord/milp/branch_and_bound.hpp"
#include "ptcoord/network.hpp"
#include "ptcoord/traffic.hpp"

namespace ptcoord {

struct MechanismOptions {
  milp::MilpOptions milp;
  double wardrop_tol_rel = 1e-5;  // times max(1, Gamma)
  double m_retry_scale = 10.0;    // big-M enlargement after a dirty audit
  bool lexicographic_zero = true;  // at alpha = 0, minimize eta among Gamma-optimal equilibria
};

/// Traffic-only model min Gamma over the equilibrium block.
struct PreScheduleModel {
  milp::Model model;
  UeBlock ue;
};
PreScheduleModel assemble_pre_schedule(const CoupledInstance& inst, const PathSet& ps, double m_scale = 1.0);

struct PreScheduleResult {
  double gamma0 = 0.0;  // CNY/h
  double eta0 = 0.0;    // CNY/h
  TrafficDecision traffic;
  DispatchDecision dispatch;
  std::vector<double> loads;  // MW per EVCS
  milp::Solution milp;
  WardropReport wardrop;
  BigMAudit big_m;
  bool fill_order_ok = true;
  double m_scale = 1.0;
  double seconds = 0.0;
};

/// Throws Infeasible or SolverLimit errors labelled with the failing stage.
PreScheduleResult pre_schedule(const CoupledInstance& inst, const PathSet& ps, const MechanismOptions& opt = {});

struct SweepPoint {
  double alpha = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  double delta_eta = 0.0;    // eta0 - eta
  double delta_gamma = 0.0;  // Gamma - Gamma0
  double psi = 0.0;          // eta + alpha * delta_eta
  double h = 0.0;            // Gamma - alpha * delta_eta
  double overall = 0.0;      // psi + h
  double tn_net_profit = 0.0;
  double pdn_net_profit = 0.0;

  milp::SolveStatus status = milp::SolveStatus::Infeasible;
  double gap = 0.0;
  long nodes = 0;
  double wall_seconds = 0.0;
  bool accepted = false;  // optimal and every audit clean
  std::string note;

  TrafficDecision traffic;
  DispatchDecision dispatch;
  std::vector<double> loads;
  WardropReport wardrop;
  KktAudit kkt;
  BigMAudit big_m;
  bool fill_order_ok = true;
  double eta_oracle = 0.0;       // direct dispatch LP at the extracted loads
  double oracle_rel_diff = 0.0;
  double m_scale = 1.0;
  bool lexicographic = false;
};

/// Fills the accounting fields from alpha, Gamma, eta and the baseline.
void account(SweepPoint& p, double gamma0, double eta0);

SweepPoint re_schedule(const CoupledInstance& inst, const PathSet& ps, double alpha, const PreScheduleResult& pre,
                       const MechanismOptions& opt = {});

/// Grid values must be sorted, distinct and inside [0,1].
void check_alpha_grid(const std::vector<double>& grid);
/// a:b:step with values rounded to 1e-10.
std::vector<double> make_alpha_grid(double first, double last, double step);

struct SweepResult {
  PreScheduleResult pre;
  std::vector<SweepPoint> points;
};

using SweepProgress = std::function<void(const SweepPoint&)>;
SweepResult sweep(const CoupledInstance& inst, const PathSet& ps, const std::vector<double>& grid,
                  const MechanismOptions& opt = {}, const SweepProgress& progress = {});

/// Index of argmin psi over accepted points; ties go to the smallest alpha.
std::size_t select_alpha_star(const std::vector<SweepPoint>& points);

struct Diagnostics {
  bool overall_nonincreasing = true;  // up to the plateau onset (whole grid without a plateau)
  int plateau_index = -1;             // first point after which delta_eta moves < 0.1 %
  double plateau_alpha = -1.0;
  bool local_generation_zero = false;  // on every plateau point
  double max_local_generation = 0.0;   // MW, over plateau points
  int strict_savings = 0;              // points with delta_eta > tolerance
};

/// local_units: number of generator units (the substation follows them).
Diagnostics diagnostics(const std::vector<SweepPoint>& points, int local_units, double generation_tol = 1e-3);

}  // namespace ptcoord
