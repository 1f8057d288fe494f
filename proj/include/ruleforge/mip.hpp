#pragma once

#include <vector>

#include "ruleforge/lp.hpp"

namespace ruleforge {

// A minimization LP plus a set of variables required to be 0/1. Binary
// variables get their bounds clamped to [0,1]; all other variables stay
// continuous within their declared bounds. branch_priority optionally names
// the decision variables to branch first (e.g. literal selectors whose
// indicator variables follow from them); branching falls back to the
// remaining binaries when every priority variable is integral.
struct MixedBinaryProgram {
  LinearProgram lp;
  std::vector<int> binaries;
  std::vector<int> branch_priority;
};

enum class MipStatus {
  Optimal,
  Feasible,    // time limit hit with an incumbent
  Infeasible,
  NoSolution,  // time limit hit before any incumbent
};

struct PoolEntry {
  std::vector<double> x;
  double objective = 0.0;
};

struct MipSolution {
  MipStatus status = MipStatus::NoSolution;
  std::vector<double> x;      // incumbent, empty when none
  double objective = 0.0;     // incumbent objective
  double best_bound = -kInf;  // global dual bound (minimization)
  // every distinct integer-feasible assignment encountered during the search
  std::vector<PoolEntry> pool;
  long long nodes = 0;
  bool hit_time_limit = false;
  // running global bound after each node, non-decreasing
  std::vector<double> bound_trace;

  bool has_incumbent() const {
    return status == MipStatus::Optimal || status == MipStatus::Feasible;
  }
};

struct MipLimits {
  double time_limit_s = kInf;
  double mip_gap_tol = 1e-6;
  double int_tol = 1e-6;
  long long node_limit = 50'000'000;
};

// LP-based branch and bound: best-bound node selection (FIFO ties),
// most-fractional branching (lowest index ties), root rounding/diving
// heuristic to seed the pool. Deterministic apart from where the time-limit
// cutoff lands; the limit is only checked between nodes. An optional warm
// basis (and matching factorization) primes the root relaxation.
MipSolution solve_mip(const MixedBinaryProgram& p, const MipLimits& limits = {},
                      const Basis* root_warm = nullptr,
                      const LpFactor* root_factor = nullptr);

}  // namespace ruleforge
