#include <chrono>
#include <cmath>
#include <limits>

#include "ptcoord/error.hpp"
#include "ptcoord/milp/branch_and_bound.hpp"

namespace ptcoord::milp {

Solution brute_force_binaries(const Model& model, int max_binaries) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<int> binaries;
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.variable(j).kind == VarKind::Binary) binaries.push_back(j);
  const int k = static_cast<int>(binaries.size());
  if (k > max_binaries)
    fail(ErrorKind::Validation, "brute force refused: " + std::to_string(k) + " binaries exceed the limit of " +
                                    std::to_string(max_binaries));

  LpEngine lp(model);
  Solution best;
  best.status = SolveStatus::Infeasible;
  double best_obj = std::numeric_limits<double>::infinity();
  const unsigned long count = 1UL << k;
  for (unsigned long mask = 0; mask < count; ++mask) {
    bool allowed = true;
    for (int t = 0; t < k && allowed; ++t) {
      const double v = (mask >> t) & 1UL ? 1.0 : 0.0;
      const Variable& var = model.variable(binaries[t]);
      allowed = v >= var.lower && v <= var.upper;
      lp.set_col_bounds(binaries[t], v, v);
    }
    if (!allowed) continue;
    const LpStatus st = lp.solve();
    ++best.nodes;
    if (st == LpStatus::Unbounded) {
      best.status = SolveStatus::Unbounded;
      best.values.clear();
      break;
    }
    if (st != LpStatus::Optimal) continue;
    const double obj = lp.objective() + model.objective_constant();
    if (obj < best_obj - 1e-9 * std::max(1.0, std::abs(obj))) {
      best_obj = obj;
      best.values = lp.primal();
      for (int b : binaries) best.values[b] = std::round(best.values[b]);
      best.objective = model.objective_value(best.values);
      best.status = SolveStatus::Optimal;
    }
  }
  best.best_bound = best.objective;
  best.lp_iterations = lp.iterations();
  best.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

}  // namespace ptcoord::milp
