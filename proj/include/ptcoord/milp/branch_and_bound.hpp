#pragma once

#include "ptcoord/milp/model.hpp"
#include "ptcoord/milp/simplex.hpp"

namespace ptcoord::milp {

enum class Branching : std::uint8_t {
  MostFractional,  // largest min(x, 1-x), lowest index on ties
  Pseudocost,      // product score of pseudocosts, strong branching until reliable
};

struct MilpOptions {
  double gap_tol = 1e-6;  // relative
  long node_limit = 500'000;
  double integrality_tol = 1e-6;
  bool presolve = true;
  bool node_propagation = true;
  Branching branching = Branching::Pseudocost;
  int reliability = 4;          // observations per direction before pseudocosts are trusted
  int strong_candidates = 8;    // strong-branching candidates per node
  long strong_iterations = 40;  // dual simplex iterations per strong-branching child
  int log_interval = 0;         // progress line to stderr every N nodes (0 = silent)
  LpOptions lp;
};

/// Best-bound branch-and-bound over the binaries of the model with an initial
/// depth-first dive. Children are warm-started from the parent's optimal
/// basis. All choices are deterministic (index order breaks every tie).
Solution solve_milp(const Model& model, const MilpOptions& options = {});

/// Exhaustive enumeration of binary assignments with an LP per assignment.
/// Test oracle; refuses models with more than max_binaries binaries.
Solution brute_force_binaries(const Model& model, int max_binaries = 20);

}  // namespace ptcoord::milp
