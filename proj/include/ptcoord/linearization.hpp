#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ptcoord/milp/model.hpp"

namespace ptcoord {

/// Chord interpolation of a scalar curve on [0, x_hi] with equal-width segments.
struct PwlCurve {
  int owner = 0;
  std::vector<double> knots;   // N+1 abscissas
  double width = 0.0;          // segment width
  std::vector<double> slopes;  // N chord slopes
  double intercept = 0.0;      // curve value at 0

  int segments() const { return static_cast<int>(slopes.size()); }
  double upper() const { return knots.back(); }
  /// Interpolant value; x is clamped to the domain.
  double evaluate(double x) const;
};

PwlCurve build_pwl(const std::function<double(double)>& curve, double x_hi, int segments, int owner = 0);

/// Variables created by the fill-order encoding of one curve.
struct FillOrder {
  std::vector<int> fill;   // segment fill amounts, one per segment
  std::vector<int> order;  // segment-full switches, one per interior knot
  double width = 0.0;

  milp::LinExpr total() const;                        // sum of fills, equals the curve argument
  milp::LinExpr value(const PwlCurve& curve) const;   // intercept + sum slope * fill
};

/// Adds fills in [0, width] and the switches Z_j with
///   width - fill_j <= width * Z_j,  fill_{j+1} <= width * (1 - Z_j).
/// The caller ties total() to the curve argument.
FillOrder encode_fill_order(milp::Model& model, const PwlCurve& curve, const std::string& prefix);

/// True when a later segment is filled only after every earlier one is full.
bool fill_order_holds(const FillOrder& enc, const std::vector<double>& x, double tol);

/// Complementarity pair 0 <= f  perp  g >= 0.
struct BigMPair {
  std::string name;
  milp::LinExpr f;
  milp::LinExpr g;
  double m_f = 0.0;
  double m_g = 0.0;
  int binary = -1;      // switch X (X = 1 lets f be positive); -1 when f is forced to 0
  bool f_forced_zero = false;
};

/// safety * max |expr| over the model's variable box. Throws Domain when a
/// variable with a nonzero coefficient is unbounded on the relevant side.
double estimate_big_m(const milp::LinExpr& expr, const milp::Model& model, double safety = 1.1);

/// Lower and upper bound of expr over the model's variable box.
std::pair<double, double> interval_bounds(const milp::LinExpr& expr, const milp::Model& model);

/// Emits 0 <= f <= M_f X, 0 <= g <= M_g (1 - X). When M_f/M_g are not set
/// (<= 0) they are estimated from the box and multiplied by m_scale. A residual
/// that is positive over the whole box forces f = 0 without a binary.
void big_m_linearize(milp::Model& model, BigMPair& pair, double safety = 1.1, double m_scale = 1.0);

struct BigMAudit {
  std::vector<std::string> flagged;
  double worst_ratio = 0.0;  // max over pairs of side / M
  bool clean() const { return flagged.empty(); }
};

/// Flags every pair whose f or g reaches 99% of its M at the point x.
BigMAudit audit_big_m(const std::vector<double>& x, const std::vector<BigMPair>& pairs);

}  // namespace ptcoord
