#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ptcoord/milp/model.hpp"

namespace ptcoord {

/// min c'v  s.t.  A_eq v = b_eq(p),  A_in v <= b_in,  lower <= v <= upper.
/// Equality right-hand sides may depend affinely on external parameters p
/// (the charging loads when the LP is embedded as a lower level).
struct CanonicalLp {
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  struct Column {
    std::string name;
    double cost = 0.0;
    double lower = -kInf;
    double upper = kInf;
    // Range the optimal value provably lies in; used to box free columns when
    // the LP is embedded. Defaults to [lower, upper].
    double implied_lower = -kInf;
    double implied_upper = kInf;
    // Bounds on the multipliers of the variable bounds (big-M policy).
    double bound_dual_limit = kInf;
  };

  struct Row {
    std::string name;
    std::vector<milp::Term> terms;
    double rhs = 0.0;
    std::vector<milp::Term> rhs_params;  // rhs += sum coef * p[var]
    double dual_limit = kInf;            // |multiplier| (equalities) or multiplier (inequalities) bound
  };

  std::vector<Column> cols;
  std::vector<Row> equalities;
  std::vector<Row> inequalities;  // a'v <= rhs
  int num_params = 0;

  int add_col(Column c) {
    cols.push_back(std::move(c));
    return static_cast<int>(cols.size()) - 1;
  }

  double row_rhs(const Row& r, const std::vector<double>& params) const;
  /// Builds a stand-alone model with the parameters fixed to the given values.
  milp::Model to_model(const std::vector<double>& params) const;
  /// Converts a continuous model: >= rows are negated into <= rows.
  static CanonicalLp from_model(const milp::Model& model);
};

}  // namespace ptcoord
