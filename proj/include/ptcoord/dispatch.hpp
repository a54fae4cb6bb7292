#pragma once

#include <string>
#include <vector>

#include "ptcoord/canonical_lp.hpp"
#include "ptcoord/milp/model.hpp"
#include "ptcoord/network.hpp"

namespace ptcoord {

/// Supports F >= slope * p + intercept of a piecewise-linear cost curve.
struct CostSegment {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Chords of a p^2 + b p + c over [p_min, p_max] at equal spacing. A linear
/// curve or a degenerate range yields one exact segment.
std::vector<CostSegment> cost_pwl(const Generator& gen, int segments);

/// Dispatch LP in canonical form. Units are the generators followed by the
/// substation. Angle columns hold power_base * angle (MW scale).
struct DispatchLp {
  CanonicalLp lp;
  std::vector<double> loads;  // MW per EVCS, the LP parameters

  int eta = -1;
  std::vector<int> unit_cost;    // F per unit
  std::vector<int> unit_output;  // P per unit
  std::vector<int> line_flow;
  std::vector<int> bus_angle;
  int eta_row = -1;
  std::vector<int> bus_row;   // equality index per bus
  std::vector<int> line_row;  // equality index per line
  std::vector<std::vector<int>> unit_support_rows;  // inequality indices per unit
  std::vector<int> unit_bus;  // bus index per unit
  int reference_bus = -1;
  double angle_scale = 1.0;

  int num_units() const { return static_cast<int>(unit_output.size()); }
};

DispatchLp assemble_dispatch_lp(const CoupledInstance& inst, const std::vector<double>& charging_loads);

struct DispatchDecision {
  std::vector<double> output;     // MW per unit (generators then substation)
  std::vector<double> cost;       // CNY/h per unit, epigraph values
  std::vector<double> line_flow;  // MW
  std::vector<double> angle;      // rad
  double eta = 0.0;               // CNY/h
};

/// Reads a decision out of a point of the dispatch columns. offset maps
/// column j of the LP to model variable offset[j].
DispatchDecision extract_dispatch(const DispatchLp& d, const std::vector<double>& x, const std::vector<int>& offset);

struct DispatchSolve {
  milp::SolveStatus status = milp::SolveStatus::Infeasible;
  DispatchDecision decision;
  long iterations = 0;
};

/// Solves the LP at its stored loads. Infeasible/unbounded statuses are
/// returned, not thrown.
DispatchSolve solve_dispatch(const DispatchLp& d);

struct DispatchResiduals {
  double bus_balance = 0.0;  // MW, max over buses
  double dc_law = 0.0;       // MW, max over lines of |X P - S (theta_from - theta_to)|
  double bounds = 0.0;       // max bound violation
  double epigraph = 0.0;     // max over units of F - max support
  double eta_sum = 0.0;      // |eta - sum F|
};

/// Recomputes the dispatch constraints from the instance data.
DispatchResiduals dispatch_residuals(const CoupledInstance& inst, const std::vector<double>& loads,
                                     const DispatchDecision& dec);

}  // namespace ptcoord
