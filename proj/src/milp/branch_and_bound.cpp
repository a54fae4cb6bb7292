#include "ptcoord/milp/branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <queue>

#include "ptcoord/milp/presolve.hpp"

namespace ptcoord::milp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Node {
  double bound = -kInf;
  int depth = 0;
  long id = 0;
  std::vector<std::pair<int, signed char>> fixings;
  std::shared_ptr<const Basis> basis;
  // Branching record used to update pseudocosts once the node is solved.
  int branch_var = -1;
  double branch_frac = 0.0;
  double parent_obj = 0.0;
};

// Lowest bound first; among equal bounds the deeper, then the older node.
struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

struct Pseudocosts {
  std::vector<double> sum_down, sum_up;
  std::vector<int> cnt_down, cnt_up;

  explicit Pseudocosts(int n) : sum_down(n, 0.0), sum_up(n, 0.0), cnt_down(n, 0), cnt_up(n, 0) {}

  void record(int var, bool up, double unit_gain) {
    if (!std::isfinite(unit_gain)) return;
    if (up) {
      sum_up[var] += unit_gain;
      ++cnt_up[var];
    } else {
      sum_down[var] += unit_gain;
      ++cnt_down[var];
    }
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const Model& model, const MilpOptions& options)
      : model_(model), opt_(options), n_(model.num_vars()), prop_(model), lp_(model, options.lp), pc_(n_) {}

  Solution run();

 private:
  double abs_gap(double inc) const { return opt_.gap_tol * std::max(1.0, std::abs(inc)); }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  void sync_bounds(const std::vector<double>& lo, const std::vector<double>& up);
  // Returns the branching variable, or -2 when strong branching proves the node infeasible.
  int select_branch(const std::vector<double>& x, double obj, const Basis& basis, double& gain_down,
                    double& gain_up);
  double pseudocost_estimate(int var, bool up, double avg_down, double avg_up) const;
  void log(const char* tag, long open_size, double bound) const;

  const Model& model_;
  const MilpOptions& opt_;
  int n_;
  Propagator prop_;
  LpEngine lp_;
  Pseudocosts pc_;
  std::vector<int> binaries_;
  std::vector<double> root_lo_, root_up_, lp_lo_, lp_up_;
  double incumbent_ = kInf;
  long nodes_ = 0;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void BranchAndBound::sync_bounds(const std::vector<double>& lo, const std::vector<double>& up) {
  for (int j = 0; j < n_; ++j) {
    if (lo[j] != lp_lo_[j] || up[j] != lp_up_[j]) {
      lp_.set_col_bounds(j, lo[j], up[j]);
      lp_lo_[j] = lo[j];
      lp_up_[j] = up[j];
    }
  }
}

double BranchAndBound::pseudocost_estimate(int var, bool up, double avg_down, double avg_up) const {
  if (up) return pc_.cnt_up[var] ? pc_.sum_up[var] / pc_.cnt_up[var] : avg_up;
  return pc_.cnt_down[var] ? pc_.sum_down[var] / pc_.cnt_down[var] : avg_down;
}

int BranchAndBound::select_branch(const std::vector<double>& x, double obj, const Basis& basis,
                                  double& gain_down, double& gain_up) {
  gain_down = gain_up = 0.0;
  std::vector<int> frac;
  for (int b : binaries_) {
    const double f = std::min(x[b], 1.0 - x[b]);
    if (f > opt_.integrality_tol) frac.push_back(b);
  }
  if (frac.empty()) return -1;

  if (opt_.branching == Branching::MostFractional) {
    int best = -1;
    double best_f = -1.0;
    for (int b : frac) {
      const double f = std::min(x[b], 1.0 - x[b]);
      if (f > best_f) {
        best_f = f;
        best = b;
      }
    }
    return best;
  }

  // Strong branching on the most fractional unreliable candidates.
  std::vector<int> unreliable;
  for (int b : frac)
    if (std::min(pc_.cnt_down[b], pc_.cnt_up[b]) < opt_.reliability) unreliable.push_back(b);
  std::stable_sort(unreliable.begin(), unreliable.end(), [&](int a, int b) {
    return std::min(x[a], 1.0 - x[a]) > std::min(x[b], 1.0 - x[b]);
  });
  if (static_cast<int>(unreliable.size()) > opt_.strong_candidates) unreliable.resize(opt_.strong_candidates);

  const double obj_const = model_.objective_constant();
  std::vector<double> strong_down(n_, -1.0), strong_up(n_, -1.0);
  bool touched_lp = false;
  for (int b : unreliable) {
    for (int dir = 0; dir < 2; ++dir) {
      const double v = static_cast<double>(dir);
      lp_.set_col_bounds(b, v, v);
      lp_.set_basis(basis);
      if (std::isfinite(incumbent_))
        lp_.set_cutoff(incumbent_ - abs_gap(incumbent_) - obj_const);
      else
        lp_.clear_cutoff();
      const LpStatus st = lp_.solve(opt_.strong_iterations);
      touched_lp = true;
      double gain;
      if (st == LpStatus::Infeasible || st == LpStatus::Cutoff)
        gain = kInf;
      else if (st == LpStatus::Optimal || st == LpStatus::IterationLimit)
        gain = std::max(0.0, lp_.objective() + obj_const - obj);
      else
        gain = 0.0;
      (dir ? strong_up : strong_down)[b] = gain;
      const double f = dir ? 1.0 - x[b] : x[b];
      if (std::isfinite(gain)) pc_.record(b, dir == 1, gain / f);
    }
    lp_.set_col_bounds(b, lp_lo_[b], lp_up_[b]);
    if (std::isinf(strong_down[b]) && std::isinf(strong_up[b])) return -2;
  }
  if (touched_lp) lp_.set_basis(basis);

  double avg_down = 0.0, avg_up = 0.0;
  int nd = 0, nu = 0;
  for (int b : binaries_) {
    if (pc_.cnt_down[b]) {
      avg_down += pc_.sum_down[b] / pc_.cnt_down[b];
      ++nd;
    }
    if (pc_.cnt_up[b]) {
      avg_up += pc_.sum_up[b] / pc_.cnt_up[b];
      ++nu;
    }
  }
  avg_down = nd ? avg_down / nd : 1.0;
  avg_up = nu ? avg_up / nu : 1.0;

  constexpr double eps = 1e-6;
  int best = -1;
  double best_score = -1.0;
  for (int b : frac) {
    double down, up;
    if (strong_down[b] >= 0.0) {
      down = strong_down[b];
      up = strong_up[b];
    } else {
      down = x[b] * pseudocost_estimate(b, false, avg_down, avg_up);
      up = (1.0 - x[b]) * pseudocost_estimate(b, true, avg_down, avg_up);
    }
    double score;
    if (std::isinf(down) || std::isinf(up))
      score = kInf;
    else
      score = std::max(down, eps) * std::max(up, eps);
    if (score > best_score) {
      best_score = score;
      best = b;
      gain_down = std::isfinite(down) ? (strong_down[b] >= 0.0 ? down : 0.0) : kInf;
      gain_up = std::isfinite(up) ? (strong_up[b] >= 0.0 ? up : 0.0) : kInf;
    }
    if (std::isinf(score)) break;
  }
  return best;
}

void BranchAndBound::log(const char* tag, long open_size, double bound) const {
  if (opt_.log_interval <= 0) return;
  std::fprintf(stderr, "[bb] %-4s nodes %8ld open %7ld inc %.8g bound %.8g iters %ld %.1fs\n", tag, nodes_,
               open_size, incumbent_, bound, lp_.iterations(), elapsed());
}

Solution BranchAndBound::run() {
  const double obj_const = model_.objective_constant();
  Solution sol;
  root_lo_.resize(n_);
  root_up_.resize(n_);
  for (int j = 0; j < n_; ++j) {
    root_lo_[j] = model_.variable(j).lower;
    root_up_[j] = model_.variable(j).upper;
    if (model_.variable(j).kind == VarKind::Binary) binaries_.push_back(j);
  }
  if (opt_.presolve) {
    PresolveResult pre = presolve_bounds(model_, true);
    if (pre.infeasible) {
      sol.status = SolveStatus::Infeasible;
      sol.seconds = elapsed();
      return sol;
    }
    root_lo_ = std::move(pre.lower);
    root_up_ = std::move(pre.upper);
  }
  lp_lo_ = root_lo_;
  lp_up_ = root_up_;
  for (int j = 0; j < n_; ++j) lp_.set_col_bounds(j, root_lo_[j], root_up_[j]);

  std::vector<double> best_x;
  bool limit_hit = false, lp_trouble = false;
  long next_id = 1;
  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  std::optional<Node> next = Node{};
  std::vector<double> lo, up;
  std::vector<int> seeds;

  for (;;) {
    if (!next) {
      if (open.empty()) break;
      if (std::isfinite(incumbent_) && incumbent_ - open.top().bound <= abs_gap(incumbent_)) break;
      next = open.top();
      open.pop();
    }
    if (nodes_ >= opt_.node_limit) {
      limit_hit = true;
      open.push(std::move(*next));
      next.reset();
      break;
    }
    Node node = std::move(*next);
    next.reset();
    if (std::isfinite(incumbent_) && node.bound >= incumbent_ - abs_gap(incumbent_)) continue;
    ++nodes_;
    if (opt_.log_interval > 0 && nodes_ % opt_.log_interval == 0)
      log("", static_cast<long>(open.size()), open.empty() ? node.bound : std::min(node.bound, open.top().bound));

    lo = root_lo_;
    up = root_up_;
    seeds.clear();
    bool node_ok = true;
    for (auto [col, val] : node.fixings) {
      if (val < lo[col] || val > up[col]) node_ok = false;
      lo[col] = up[col] = val;
      seeds.push_back(col);
    }
    if (!node_ok) continue;
    if (opt_.node_propagation && !seeds.empty() && !prop_.propagate(lo, up, seeds)) continue;
    sync_bounds(lo, up);
    if (node.basis) lp_.set_basis(*node.basis);
    if (std::isfinite(incumbent_))
      lp_.set_cutoff(incumbent_ - abs_gap(incumbent_) - obj_const);
    else
      lp_.clear_cutoff();

    const LpStatus st = lp_.solve();
    if (st == LpStatus::Infeasible || st == LpStatus::Cutoff) continue;
    if (st == LpStatus::Unbounded) {
      if (node.depth == 0) {
        sol.status = SolveStatus::Unbounded;
        sol.seconds = elapsed();
        sol.lp_iterations = lp_.iterations();
        return sol;
      }
      continue;
    }
    if (st == LpStatus::IterationLimit) {
      lp_trouble = true;
      continue;
    }
    const double obj = lp_.objective() + obj_const;
    if (node.branch_var >= 0) {
      const bool went_up = lp_lo_[node.branch_var] > 0.5;
      const double f = went_up ? 1.0 - node.branch_frac : node.branch_frac;
      pc_.record(node.branch_var, went_up, std::max(0.0, obj - node.parent_obj) / f);
    }
    if (std::isfinite(incumbent_) && obj >= incumbent_ - abs_gap(incumbent_)) continue;
    std::vector<double> x = lp_.primal();

    const Basis basis_here = lp_.basis();
    double gain_down = 0.0, gain_up = 0.0;
    const int branch = select_branch(x, obj, basis_here, gain_down, gain_up);
    if (branch == -2) continue;
    if (branch < 0) {
      for (int b : binaries_) x[b] = std::round(x[b]);
      incumbent_ = obj;
      best_x = std::move(x);
      log("inc", static_cast<long>(open.size()), open.empty() ? obj : open.top().bound);
      continue;
    }

    auto basis = std::make_shared<const Basis>(basis_here);
    Node down{obj + (std::isfinite(gain_down) ? gain_down : 0.0), node.depth + 1, next_id++, node.fixings, basis,
              branch, x[branch], obj};
    down.fixings.emplace_back(branch, 0);
    Node upn{obj + (std::isfinite(gain_up) ? gain_up : 0.0), node.depth + 1, next_id++, std::move(node.fixings),
             basis, branch, x[branch], obj};
    upn.fixings.emplace_back(branch, 1);
    const bool down_dead = std::isinf(gain_down), up_dead = std::isinf(gain_up);
    if (!std::isfinite(incumbent_)) {
      // Initial dive: follow the rounding direction until an incumbent exists.
      const bool prefer_up = up_dead ? false : (down_dead ? true : x[branch] >= 0.5);
      if (prefer_up) {
        if (!down_dead) open.push(std::move(down));
        next = std::move(upn);
      } else {
        if (!up_dead) open.push(std::move(upn));
        next = std::move(down);
      }
    } else {
      if (!down_dead) open.push(std::move(down));
      if (!up_dead) open.push(std::move(upn));
    }
  }

  double best_bound = incumbent_;
  if (next) best_bound = std::min(best_bound, next->bound);
  if (!open.empty()) best_bound = std::min(best_bound, open.top().bound);

  sol.nodes = nodes_;
  sol.lp_iterations = lp_.iterations();
  sol.seconds = elapsed();
  sol.best_bound = best_bound;
  log("end", static_cast<long>(open.size()), best_bound);
  if (!std::isfinite(incumbent_)) {
    sol.status = (limit_hit || lp_trouble) ? SolveStatus::GapLimit : SolveStatus::Infeasible;
    return sol;
  }
  sol.values = std::move(best_x);
  sol.objective = model_.objective_value(sol.values);
  sol.gap = std::max(0.0, (incumbent_ - best_bound) / std::max(1.0, std::abs(incumbent_)));
  sol.status = (sol.gap <= opt_.gap_tol && !lp_trouble) ? SolveStatus::Optimal : SolveStatus::GapLimit;
  return sol;
}

}  // namespace

Solution solve_milp(const Model& model, const MilpOptions& options) {
  BranchAndBound bb(model, options);
  Solution sol = bb.run();
  if (!sol.has_point()) return sol;
  // Re-solve with the switches fixed exactly: node LPs accept binaries within
  // the integrality tolerance, which leaks M * tol into gated rows.
  Model fixed = model;
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.variable(j).kind == VarKind::Binary) fixed.set_bounds(j, sol.values[j], sol.values[j]);
  const Solution polish = solve_lp(fixed, options.lp);
  const double slack = options.gap_tol * std::max(1.0, std::abs(sol.objective));
  if (polish.status == SolveStatus::Optimal && polish.objective <= sol.objective + slack) {
    sol.values = polish.values;
    for (int j = 0; j < model.num_vars(); ++j)
      if (model.variable(j).kind == VarKind::Binary) sol.values[j] = std::round(sol.values[j]);
    sol.objective = model.objective_value(sol.values);
  }
  return sol;
}

}  // namespace ptcoord::milp
