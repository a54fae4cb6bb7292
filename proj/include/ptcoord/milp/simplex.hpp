#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

#include "ptcoord/milp/model.hpp"

namespace ptcoord::milp {

struct LpOptions {
  double primal_tol = 1e-7;
  double dual_tol = 1e-9;
  long iteration_limit = 500'000;  // per solve call
  int refactor_interval = 64;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_limit = 60;
  bool scale = true;
};

enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded, IterationLimit, Cutoff };

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, AtZero };

/// Status of every structural column followed by every row logical.
struct Basis {
  std::vector<VarStatus> status;
  bool empty() const { return status.empty(); }
};

/// Bounded revised simplex over [A -I] z = 0 with column and row bounds.
/// Binaries are treated as continuous [0,1] columns. Primal simplex is used for
/// cold starts, dual simplex after bound changes on an optimal basis.
class LpEngine {
 public:
  explicit LpEngine(const Model& model, LpOptions options = {});
  ~LpEngine();
  LpEngine(const LpEngine&) = delete;
  LpEngine& operator=(const LpEngine&) = delete;

  int num_cols() const;
  int num_rows() const;

  void set_col_bounds(int col, double lower, double upper);
  double col_lower(int col) const;
  double col_upper(int col) const;

  /// Dual simplex stops early once the objective provably exceeds this value.
  void set_cutoff(double value);
  void clear_cutoff() { set_cutoff(std::numeric_limits<double>::infinity()); }

  LpStatus solve();
  /// Solve with a per-call iteration cap (strong branching).
  LpStatus solve(long iteration_limit);

  double objective() const;
  std::vector<double> primal() const;
  std::vector<double> row_duals() const;
  std::vector<double> reduced_costs() const;

  Basis basis() const;
  void set_basis(const Basis& basis);
  long iterations() const;

  /// When set, every phase-2 primal objective value is appended (tests use
  /// this to check that intermediate feasible points never undercut the optimum).
  void set_objective_trace(std::vector<double>* trace);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// LP relaxation solve of a model (binaries relaxed to [0,1]).
Solution solve_lp(const Model& model, const LpOptions& options = {});

}  // namespace ptcoord::milp
