#pragma once

#include <vector>

#include "ptcoord/milp/model.hpp"

namespace ptcoord::milp {

/// Activity-based bound propagation over the rows of a model.
class Propagator {
 public:
  explicit Propagator(const Model& model);

  /// Tightens lower/upper in place starting from the rows touching `seeds`
  /// (all rows when seeds is empty). Binary bounds are rounded to {0,1}.
  /// Returns false when some row is proven infeasible.
  bool propagate(std::vector<double>& lower, std::vector<double>& upper, const std::vector<int>& seeds = {}) const;

 private:
  bool tighten_row(int row, std::vector<double>& lower, std::vector<double>& upper, std::vector<int>& changed) const;

  const Model& model_;
  std::vector<std::vector<int>> col_rows_;
};

struct PresolveResult {
  bool infeasible = false;
  std::vector<double> lower;
  std::vector<double> upper;
  int fixed_binaries = 0;
};

/// Bound propagation followed by probing on every free binary: a binary whose
/// one value propagates to infeasibility is fixed to the other, and variable
/// bounds are tightened to the hull of both probe outcomes.
PresolveResult presolve_bounds(const Model& model, bool probing = true);

}  // namespace ptcoord::milp
