#include "basis_factor.hpp"

#include <cmath>

namespace ptcoord::milp::detail {

bool BasisFactor::factorize(const std::vector<int>& head, const ColumnFn& column) {
  etas_.clear();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(head.size() * 3);
  for (int k = 0; k < m_; ++k) {
    ColumnView c = column(head[k]);
    for (int t = 0; t < c.size; ++t) triplets.emplace_back(c.index[t], k, c.value[t]);
  }
  Eigen::SparseMatrix<double> b(m_, m_);
  b.setFromTriplets(triplets.begin(), triplets.end());
  b.makeCompressed();
  lu_.compute(b);
  return lu_.info() == Eigen::Success;
}

void BasisFactor::ftran(std::vector<double>& rhs) const {
  work_ = Eigen::Map<const Eigen::VectorXd>(rhs.data(), m_);
  Eigen::VectorXd x = lu_.solve(work_);
  Eigen::Map<Eigen::VectorXd>(rhs.data(), m_) = x;
  for (const Eta& e : etas_) {
    const double xr = rhs[e.pos];
    if (xr == 0.0) continue;
    rhs[e.pos] = xr * e.pivot;
    for (std::size_t k = 0; k < e.index.size(); ++k) rhs[e.index[k]] += e.value[k] * xr;
  }
}

void BasisFactor::btran(std::vector<double>& rhs) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    const Eta& e = *it;
    double s = rhs[e.pos] * e.pivot;
    for (std::size_t k = 0; k < e.index.size(); ++k) s += e.value[k] * rhs[e.index[k]];
    rhs[e.pos] = s;
  }
  work_ = Eigen::Map<const Eigen::VectorXd>(rhs.data(), m_);
  Eigen::VectorXd y = lu_.transpose().solve(work_);
  Eigen::Map<Eigen::VectorXd>(rhs.data(), m_) = y;
}

void BasisFactor::update(int pos, const std::vector<double>& alpha) {
  Eta e;
  e.pos = pos;
  const double piv = alpha[pos];
  e.pivot = 1.0 / piv;
  for (int i = 0; i < m_; ++i) {
    if (i == pos || alpha[i] == 0.0) continue;
    e.index.push_back(i);
    e.value.push_back(-alpha[i] / piv);
  }
  etas_.push_back(std::move(e));
}

void find_dependent_columns(int m, const std::vector<int>& head, const ColumnFn& column,
                            std::vector<int>& dependent_positions, std::vector<int>& free_rows) {
  dependent_positions.clear();
  free_rows.clear();
  std::vector<int> pivot_rows;
  std::vector<std::vector<double>> reduced;
  std::vector<char> used(m, 0);
  std::vector<double> v(m);
  for (int k = 0; k < m; ++k) {
    std::fill(v.begin(), v.end(), 0.0);
    ColumnView c = column(head[k]);
    double norm = 0.0;
    for (int t = 0; t < c.size; ++t) {
      v[c.index[t]] += c.value[t];
      norm = std::max(norm, std::abs(c.value[t]));
    }
    for (std::size_t p = 0; p < reduced.size(); ++p) {
      const double f = v[pivot_rows[p]];
      if (f == 0.0) continue;
      const std::vector<double>& u = reduced[p];
      for (int i = 0; i < m; ++i) v[i] -= f * u[i];
    }
    int best = -1;
    double best_abs = 0.0;
    for (int i = 0; i < m; ++i) {
      if (!used[i] && std::abs(v[i]) > best_abs) {
        best_abs = std::abs(v[i]);
        best = i;
      }
    }
    if (best < 0 || best_abs <= 1e-9 * std::max(1.0, norm)) {
      dependent_positions.push_back(k);
      continue;
    }
    const double inv = 1.0 / v[best];
    for (double& vi : v) vi *= inv;
    used[best] = 1;
    pivot_rows.push_back(best);
    reduced.push_back(v);
  }
  for (int i = 0; i < m; ++i)
    if (!used[i]) free_rows.push_back(i);
}

}  // namespace ptcoord::milp::detail
