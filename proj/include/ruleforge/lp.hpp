#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

namespace ruleforge {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : char { LE = 'L', GE = 'G', EQ = 'E' };

// Sparse minimization LP, stored column-major (column generation appends
// columns; the simplex prices columns).
struct LinearProgram {
  // per-variable sparse column as (row, coeff) pairs, rows strictly increasing
  std::vector<std::vector<std::pair<int, double>>> cols;
  std::vector<double> obj;
  std::vector<double> lower, upper;
  std::vector<RowSense> sense;
  std::vector<double> rhs;
  double obj_offset = 0.0;

  int num_vars() const { return static_cast<int>(cols.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }

  int add_var(double objective, double lb, double ub) {
    cols.emplace_back();
    obj.push_back(objective);
    lower.push_back(lb);
    upper.push_back(ub);
    return num_vars() - 1;
  }

  int add_row(RowSense s, double b) {
    sense.push_back(s);
    rhs.push_back(b);
    return num_rows() - 1;
  }

  void add_entry(int var, int row, double coeff) {
    if (coeff != 0.0) cols[var].emplace_back(row, coeff);
  }

  // Basic shape/NaN validation; throws std::invalid_argument.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

// Simplex basis snapshot: which variable sits in each basis row plus the
// at-lower/at-upper state of every structural and logical variable. Used to
// warm start the next solve.
struct Basis {
  enum State : std::uint8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2 };
  std::vector<int> basic;          // m entries, variable index per basis row
  std::vector<std::uint8_t> state; // num_vars + num_rows entries
  bool valid() const { return !basic.empty(); }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;             // structural values
  std::vector<double> duals;         // one per row; at an optimum of a
                                     // minimization, GE rows have duals >= 0
                                     // and LE rows have duals <= 0
  std::vector<double> reduced_costs; // structural reduced costs
  Basis basis;
  int iterations = 0;
};

struct LpOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  double pivot_tol = 1e-9;
  int iter_limit = 200000;
  double time_limit_s = kInf;  // returns IterationLimit when exceeded
};

// Opaque factorization cache. When the warm basis matches the cached one the
// solver skips the initial refactorization; repeated re-solves of nearly
// identical LPs (column generation, branch and bound) then cost only their
// pivots.
struct LpFactor {
  std::vector<int> basic;
  std::vector<double> binv;
  void shift_indices(int from) {
    for (int& b : basic)
      if (b >= from) ++b;
  }
};

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opts = {},
                    const Basis* warm = nullptr, LpFactor* cache = nullptr);

// Human-readable dump in an LP-like text format, for cross-checking against
// external solvers. Developer tooling only.
void write_lp_text(std::ostream& os, const LinearProgram& lp);

}  // namespace ruleforge
