#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <functional>
#include <vector>

namespace ptcoord::milp::detail {

/// Sparse column view: row indices and values.
struct ColumnView {
  const int* index;
  const double* value;
  int size;
};

using ColumnFn = std::function<ColumnView(int var)>;

/// LU of the basis matrix with product-form eta updates between refactorizations.
class BasisFactor {
 public:
  explicit BasisFactor(int rows) : m_(rows), work_(rows) {}

  /// Factorizes the columns named by head; false when the basis is singular.
  bool factorize(const std::vector<int>& head, const ColumnFn& column);

  /// Solves B x = rhs in place.
  void ftran(std::vector<double>& rhs) const;
  /// Solves B^T x = rhs in place.
  void btran(std::vector<double>& rhs) const;

  /// Records replacement of basis position pos; alpha = B^{-1} a_entering.
  void update(int pos, const std::vector<double>& alpha);

  int updates() const { return static_cast<int>(etas_.size()); }

 private:
  struct Eta {
    int pos;
    double pivot;               // 1 / alpha[pos]
    std::vector<int> index;     // off-pivot nonzeros of -alpha / alpha[pos]
    std::vector<double> value;
  };

  int m_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  mutable Eigen::VectorXd work_;
};

/// Finds basis positions whose columns are linearly dependent on earlier ones
/// and the rows left without a pivot (dense elimination, used only for repair).
void find_dependent_columns(int m, const std::vector<int>& head, const ColumnFn& column,
                            std::vector<int>& dependent_positions, std::vector<int>& free_rows);

}  // namespace ptcoord::milp::detail
