#include "ruleforge/mip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <queue>
#include <vector>

namespace ruleforge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Node {
  long long id = 0;
  double bound = -kInf;
  std::vector<double> lower, upper;  // full bound vectors for this node
  Basis basis;                       // parent LP basis for warm starting
};

struct NodeOrder {
  // min-heap on (bound, id): best bound first, FIFO on ties
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MixedBinaryProgram& p, const MipLimits& limits,
                 const Basis* root_warm, const LpFactor* root_factor)
      : p_(p), limits_(limits), t0_(Clock::now()) {
    if (root_warm != nullptr) root_warm_ = *root_warm;
    if (root_factor != nullptr) factor_ = *root_factor;
    lp_ = p.lp;
    is_binary_.assign(lp_.num_vars(), false);
    all_binaries_ = p.binaries;
    std::sort(all_binaries_.begin(), all_binaries_.end());
    for (int j : p.binaries) {
      is_binary_[j] = true;
      lp_.lower[j] = std::max(lp_.lower[j], 0.0);
      lp_.upper[j] = std::min(lp_.upper[j], 1.0);
      if (lp_.lower[j] > lp_.upper[j]) contradictory_bounds_ = true;
    }
  }

  MipSolution run() {
    if (contradictory_bounds_) {
      out_.status = MipStatus::Infeasible;
      out_.best_bound = kInf;
      return out_;
    }
    Node root;
    root.id = next_id_++;
    root.lower = lp_.lower;
    root.upper = lp_.upper;
    root.bound = -kInf;
    if (root_warm_.valid()) root.basis = root_warm_;

    LpSolution rootsol = solve_node(root);
    if (rootsol.status == LpStatus::Infeasible) {
      out_.status = MipStatus::Infeasible;
      out_.best_bound = kInf;
      return out_;
    }
    if (rootsol.status == LpStatus::Unbounded)
      throw std::runtime_error("mixed-binary program has an unbounded relaxation");
    if (rootsol.status == LpStatus::IterationLimit) {
      out_.status = MipStatus::NoSolution;
      out_.hit_time_limit = true;
      return out_;
    }
    root.bound = rootsol.objective;
    out_.best_bound = root.bound;

    try_completions(rootsol);
    dive(root, rootsol);

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    process(std::move(root), rootsol, open);

    bool exhausted = false;
    while (true) {
      if (open.empty()) {
        exhausted = true;
        break;
      }
      if (seconds_since(t0_) > limits_.time_limit_s || out_.nodes >= limits_.node_limit) {
        out_.hit_time_limit = true;
        break;
      }
      Node node = open.top();
      open.pop();
      update_bound(std::min(node.bound, has_incumbent_ ? incumbent_obj_ : kInf));
      if (has_incumbent_ && node.bound >= incumbent_obj_ - limits_.mip_gap_tol) {
        // Bound-dominated; with best-bound order every remaining node is too.
        update_bound(incumbent_obj_);
        exhausted = true;
        break;
      }
      LpSolution sol = solve_node(node);
      ++out_.nodes;
      if (sol.status == LpStatus::Infeasible) continue;
      if (sol.status == LpStatus::IterationLimit) {
        // the relaxation ran out of clock; its value is not a trusted bound,
        // so put the node back and stop with what we have
        out_.hit_time_limit = true;
        open.push(std::move(node));
        break;
      }
      if (sol.status != LpStatus::Optimal) continue;
      try_completions(sol);
      node.bound = std::max(node.bound, sol.objective);
      process(std::move(node), sol, open);
    }

    if (exhausted) {
      update_bound(has_incumbent_ ? incumbent_obj_ : kInf);
    } else if (!open.empty()) {
      update_bound(std::min(open.top().bound, has_incumbent_ ? incumbent_obj_ : kInf));
    }

    if (has_incumbent_) {
      bool gap_closed = incumbent_obj_ - out_.best_bound <= limits_.mip_gap_tol;
      out_.status = gap_closed ? MipStatus::Optimal : MipStatus::Feasible;
      out_.x = incumbent_;
      out_.objective = incumbent_obj_;
    } else {
      out_.status = out_.hit_time_limit ? MipStatus::NoSolution : MipStatus::Infeasible;
    }
    return out_;
  }

 private:
  const MixedBinaryProgram& p_;
  MipLimits limits_;
  Clock::time_point t0_;
  LinearProgram lp_;  // bounds clamped for binaries
  LinearProgram work_lp_;
  LpFactor factor_;
  Basis root_warm_;
  std::vector<bool> is_binary_;
  std::vector<int> all_binaries_;
  bool contradictory_bounds_ = false;
  MipSolution out_;
  std::vector<double> incumbent_;
  double incumbent_obj_ = kInf;
  bool has_incumbent_ = false;
  long long next_id_ = 0;
  std::map<std::vector<std::int8_t>, std::size_t> pool_index_;

  void update_bound(double b) {
    out_.best_bound = std::max(out_.best_bound, b);
    out_.bound_trace.push_back(out_.best_bound);
  }

  LpSolution solve_node(const Node& node) {
    // reuse one workspace LP; only the bounds differ between nodes
    if (work_lp_.num_vars() == 0) work_lp_ = lp_;
    work_lp_.lower = node.lower;
    work_lp_.upper = node.upper;
    LpOptions opts;
    if (limits_.time_limit_s < kInf)
      opts.time_limit_s =
          std::max(0.05, limits_.time_limit_s - seconds_since(t0_));
    return solve_lp(work_lp_, opts, node.basis.valid() ? &node.basis : nullptr, &factor_);
  }

  int most_fractional_of(const std::vector<double>& x, const std::vector<int>& vars) const {
    int best = -1;
    double best_frac = limits_.int_tol;
    for (int j : vars) {
      double frac = std::min(x[j], 1.0 - x[j]);
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        best = j;
      }
    }
    return best;
  }

  // Most fractional variable among the branch-priority set first, then among
  // all binaries; ties broken by lowest index.
  int most_fractional(const std::vector<double>& x) const {
    if (!p_.branch_priority.empty()) {
      int j = most_fractional_of(x, p_.branch_priority);
      if (j >= 0) return j;
    }
    return most_fractional_of(x, all_binaries_);
  }

  bool point_feasible(const std::vector<double>& x) const {
    for (int j = 0; j < lp_.num_vars(); ++j)
      if (x[j] < lp_.lower[j] - 1e-7 || x[j] > lp_.upper[j] + 1e-7) return false;
    std::vector<double> act(lp_.num_rows(), 0.0);
    for (int j = 0; j < lp_.num_vars(); ++j) {
      if (x[j] == 0.0) continue;
      for (auto [r, v] : lp_.cols[j]) act[r] += v * x[j];
    }
    for (int r = 0; r < lp_.num_rows(); ++r) {
      double tol = 1e-7 * (1.0 + std::abs(lp_.rhs[r]));
      switch (lp_.sense[r]) {
        case RowSense::LE:
          if (act[r] > lp_.rhs[r] + tol) return false;
          break;
        case RowSense::GE:
          if (act[r] < lp_.rhs[r] - tol) return false;
          break;
        case RowSense::EQ:
          if (std::abs(act[r] - lp_.rhs[r]) > tol) return false;
          break;
      }
    }
    return true;
  }

  // LP-free completion attempts: round the fractional binaries (nearest, then
  // floor) and keep any assignment that checks out against the original rows.
  // Floor rounding matters for masters whose tracking variables float upward
  // at fractional values.
  void try_completions(const LpSolution& sol) {
    if (sol.x.empty()) return;
    for (int mode = 0; mode < 2; ++mode) {
      std::vector<double> x = sol.x;
      for (int j = 0; j < lp_.num_vars(); ++j) {
        if (!is_binary_[j]) continue;
        x[j] = mode == 0 ? (x[j] > 0.5 ? 1.0 : 0.0)
                         : (x[j] > 1.0 - limits_.int_tol ? 1.0 : 0.0);
      }
      if (point_feasible(x)) record_integer_solution(x);
    }
  }

  void record_integer_solution(const std::vector<double>& x) {
    std::vector<std::int8_t> key(lp_.num_vars(), 0);
    for (int j = 0; j < lp_.num_vars(); ++j)
      if (is_binary_[j]) key[j] = x[j] > 0.5 ? 1 : 0;
    double obj = lp_.obj_offset;
    for (int j = 0; j < lp_.num_vars(); ++j) obj += lp_.obj[j] * x[j];
    auto it = pool_index_.find(key);
    if (it == pool_index_.end()) {
      pool_index_.emplace(std::move(key), out_.pool.size());
      out_.pool.push_back({x, obj});
    } else if (obj < out_.pool[it->second].objective - 1e-12) {
      // same binary support, better continuous completion
      out_.pool[it->second] = {x, obj};
    }
    if (obj < incumbent_obj_ - 1e-12) {
      incumbent_obj_ = obj;
      incumbent_ = x;
      has_incumbent_ = true;
    }
  }

  void process(Node&& node, const LpSolution& sol,
               std::priority_queue<Node, std::vector<Node>, NodeOrder>& open) {
    if (has_incumbent_ && sol.objective >= incumbent_obj_ - limits_.mip_gap_tol) {
      // Still worth recording an integral solution before pruning: the pool
      // keeps non-improving incumbents too.
      if (most_fractional(sol.x) < 0) record_integer_solution(sol.x);
      return;
    }
    int j = most_fractional(sol.x);
    if (j < 0) {
      record_integer_solution(sol.x);
      return;
    }
    Node down;
    down.id = next_id_++;
    down.lower = node.lower;
    down.upper = node.upper;
    down.upper[j] = 0.0;
    down.bound = sol.objective;
    down.basis = sol.basis;
    Node up;
    up.id = next_id_++;
    up.lower = node.lower;
    up.upper = node.upper;
    up.lower[j] = 1.0;
    up.bound = sol.objective;
    up.basis = sol.basis;
    open.push(std::move(down));
    open.push(std::move(up));
  }

  // Root heuristic: round the relaxation, then dive by repeatedly fixing the
  // most integral fractional binary. Seeds the solution pool early.
  void dive(const Node& root, const LpSolution& rootsol) {
    // plain rounding with a feasibility re-solve
    {
      Node fixed = root;
      fixed.basis = rootsol.basis;
      for (int j = 0; j < lp_.num_vars(); ++j) {
        if (!is_binary_[j]) continue;
        double v = rootsol.x[j] > 0.5 ? 1.0 : 0.0;
        v = std::min(std::max(v, fixed.lower[j]), fixed.upper[j]);
        fixed.lower[j] = fixed.upper[j] = v;
      }
      LpSolution sol = solve_node(fixed);
      if (sol.status == LpStatus::Optimal && most_fractional(sol.x) < 0)
        record_integer_solution(sol.x);
    }
    // Iterative dive, capped: each round pins every binary already
    // confidently sided (fraction under 0.25) plus the most integral
    // remaining one, so a handful of re-solves integralizes even hundreds of
    // binaries.
    Node cur = root;
    LpSolution sol = rootsol;
    double dive_deadline = std::min(limits_.time_limit_s,
                                    0.4 * limits_.time_limit_s);
    for (int steps = 0; steps < 25; ++steps) {
      if (seconds_since(t0_) > dive_deadline) return;
      int frac = most_fractional(sol.x);
      if (frac < 0) {
        record_integer_solution(sol.x);
        return;
      }
      int pick = -1;
      double best = 2.0;
      int pinned = 0;
      for (int j = 0; j < lp_.num_vars(); ++j) {
        if (!is_binary_[j]) continue;
        if (cur.lower[j] == cur.upper[j]) continue;
        double f = std::min(sol.x[j], 1.0 - sol.x[j]);
        if (f <= 0.25) {
          cur.lower[j] = cur.upper[j] = sol.x[j] > 0.5 ? 1.0 : 0.0;
          ++pinned;
          continue;
        }
        if (f < best - 1e-12) {
          best = f;
          pick = j;
        }
      }
      if (pick >= 0) {
        cur.lower[pick] = cur.upper[pick] = sol.x[pick] > 0.5 ? 1.0 : 0.0;
      } else if (pinned == 0) {
        return;
      }
      cur.basis = sol.basis;
      sol = solve_node(cur);
      if (sol.status != LpStatus::Optimal) return;
      try_completions(sol);
    }
  }
};

}  // namespace

MipSolution solve_mip(const MixedBinaryProgram& p, const MipLimits& limits,
                      const Basis* root_warm, const LpFactor* root_factor) {
  p.lp.validate();
  for (int j : p.binaries)
    if (j < 0 || j >= p.lp.num_vars())
      throw std::invalid_argument("binary index out of range");
  BranchAndBound bb(p, limits, root_warm, root_factor);
  return bb.run();
}

}  // namespace ruleforge
