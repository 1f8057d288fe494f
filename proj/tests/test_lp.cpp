#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "ruleforge/lp.hpp"

using namespace ruleforge;

namespace {

// Brute-force LP oracle: enumerate candidate vertices by activating every
// subset of rows/bounds of size num_vars, solve the square system, keep the
// best feasible point. Only usable for tiny LPs.
struct VertexOracle {
  const LinearProgram& lp;
  double best = kInf;
  bool feasible_found = false;

  explicit VertexOracle(const LinearProgram& l) : lp(l) {}

  static bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                           std::vector<double>& x) {
    int n = static_cast<int>(b.size());
    x.assign(n, 0.0);
    for (int k = 0; k < n; ++k) {
      int piv = -1;
      double bestv = 1e-9;
      for (int i = k; i < n; ++i)
        if (std::abs(a[i][k]) > bestv) { bestv = std::abs(a[i][k]); piv = i; }
      if (piv < 0) return false;
      std::swap(a[piv], a[k]);
      std::swap(b[piv], b[k]);
      for (int i = 0; i < n; ++i) {
        if (i == k) continue;
        double f = a[i][k] / a[k][k];
        if (f == 0.0) continue;
        for (int c = k; c < n; ++c) a[i][c] -= f * a[k][c];
        b[i] -= f * b[k];
      }
    }
    for (int k = 0; k < n; ++k) x[k] = b[k] / a[k][k];
    return true;
  }

  bool feasible(const std::vector<double>& x) const {
    for (int j = 0; j < lp.num_vars(); ++j)
      if (x[j] < lp.lower[j] - 1e-7 || x[j] > lp.upper[j] + 1e-7) return false;
    for (int r = 0; r < lp.num_rows(); ++r) {
      double act = 0.0;
      for (int j = 0; j < lp.num_vars(); ++j)
        for (auto [rr, v] : lp.cols[j])
          if (rr == r) act += v * x[j];
      switch (lp.sense[r]) {
        case RowSense::LE: if (act > lp.rhs[r] + 1e-7) return false; break;
        case RowSense::GE: if (act < lp.rhs[r] - 1e-7) return false; break;
        case RowSense::EQ: if (std::abs(act - lp.rhs[r]) > 1e-7) return false; break;
      }
    }
    return true;
  }

  double run() {
    int n = lp.num_vars();
    // candidate hyperplanes: each row (as equality) and each finite bound
    struct Plane { std::vector<double> a; double b; };
    std::vector<Plane> planes;
    for (int r = 0; r < lp.num_rows(); ++r) {
      Plane p{std::vector<double>(n, 0.0), lp.rhs[r]};
      for (int j = 0; j < n; ++j)
        for (auto [rr, v] : lp.cols[j])
          if (rr == r) p.a[j] += v;
      planes.push_back(std::move(p));
    }
    for (int j = 0; j < n; ++j) {
      if (lp.lower[j] > -kInf) {
        Plane p{std::vector<double>(n, 0.0), lp.lower[j]};
        p.a[j] = 1.0;
        planes.push_back(std::move(p));
      }
      if (lp.upper[j] < kInf) {
        Plane p{std::vector<double>(n, 0.0), lp.upper[j]};
        p.a[j] = 1.0;
        planes.push_back(std::move(p));
      }
    }
    int np = static_cast<int>(planes.size());
    std::vector<int> comb(n);
    // enumerate n-subsets
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    auto advance = [&]() {
      int k = n - 1;
      while (k >= 0 && idx[k] == np - n + k) --k;
      if (k < 0) return false;
      ++idx[k];
      for (int t = k + 1; t < n; ++t) idx[t] = idx[t - 1] + 1;
      return true;
    };
    if (np < n) return best;
    do {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (int t = 0; t < n; ++t) {
        a.push_back(planes[idx[t]].a);
        b.push_back(planes[idx[t]].b);
      }
      std::vector<double> x;
      if (!solve_square(a, b, x)) continue;
      if (!feasible(x)) continue;
      feasible_found = true;
      double obj = lp.obj_offset;
      for (int j = 0; j < n; ++j) obj += lp.obj[j] * x[j];
      best = std::min(best, obj);
    } while (advance());
    return best;
  }
};

LinearProgram random_feasible_lp(std::uint64_t seed, int n, int m) {
  std::mt19937_64 rng(seed);
  auto unif = [&](double a, double b) {
    return a + (b - a) * ((rng() >> 11) * 0x1.0p-53);
  };
  LinearProgram lp;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    lp.add_var(unif(-2, 2), 0.0, unif(2, 6));
    x0[j] = unif(0.0, 2.0);
  }
  for (int r = 0; r < m; ++r) {
    double act = 0.0;
    std::vector<double> coef(n, 0.0);
    for (int j = 0; j < n; ++j) {
      if (unif(0, 1) < 0.6) coef[j] = unif(-3, 3);
      act += coef[j] * x0[j];
    }
    int kind = static_cast<int>(rng() % 3);
    RowSense s = kind == 0 ? RowSense::LE : (kind == 1 ? RowSense::GE : RowSense::EQ);
    double margin = kind == 2 ? 0.0 : unif(0.0, 1.5);
    double rhs = s == RowSense::LE ? act + margin : (s == RowSense::GE ? act - margin : act);
    int row = lp.add_row(s, rhs);
    for (int j = 0; j < n; ++j) lp.add_entry(j, row, coef[j]);
  }
  return lp;
}

double row_activity(const LinearProgram& lp, const std::vector<double>& x, int r) {
  double act = 0.0;
  for (int j = 0; j < lp.num_vars(); ++j)
    for (auto [rr, v] : lp.cols[j])
      if (rr == r) act += v * x[j];
  return act;
}

}  // namespace

TEST_CASE("one-variable LP with duals") {
  LinearProgram lp;
  lp.add_var(1.0, 0.0, kInf);
  int r = lp.add_row(RowSense::GE, 3.0);
  lp.add_entry(0, r, 1.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(3.0));
  CHECK(sol.objective == doctest::Approx(3.0));
  CHECK(sol.duals[0] == doctest::Approx(1.0));
}

TEST_CASE("infeasible and unbounded statuses") {
  {
    LinearProgram lp;
    lp.add_var(0.0, 0.0, kInf);
    int r1 = lp.add_row(RowSense::GE, 1.0);
    int r2 = lp.add_row(RowSense::LE, 0.0);
    lp.add_entry(0, r1, 1.0);
    lp.add_entry(0, r2, 1.0);
    CHECK(solve_lp(lp).status == LpStatus::Infeasible);
  }
  {
    LinearProgram lp;
    lp.add_var(-1.0, 0.0, kInf);
    int r = lp.add_row(RowSense::GE, 0.0);
    lp.add_entry(0, r, 1.0);
    CHECK(solve_lp(lp).status == LpStatus::Unbounded);
  }
}

TEST_CASE("equality rows and upper bounds") {
  // min -x - y  s.t. x + y = 1.5, x,y in [0,1]
  LinearProgram lp;
  lp.add_var(-1.0, 0.0, 1.0);
  lp.add_var(-1.0, 0.0, 1.0);
  int r = lp.add_row(RowSense::EQ, 1.5);
  lp.add_entry(0, r, 1.0);
  lp.add_entry(1, r, 1.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-1.5));
}

TEST_CASE("degenerate LP (Beale-style) terminates") {
  // Classic cycling-prone instance under naive pivoting:
  // min -0.75 x1 + 150 x2 - 0.02 x3 + 6 x4
  // s.t. 0.25 x1 - 60 x2 - 0.04 x3 + 9 x4 <= 0
  //      0.5  x1 - 90 x2 - 0.02 x3 + 3 x4 <= 0
  //      x3 <= 1
  LinearProgram lp;
  lp.add_var(-0.75, 0.0, kInf);
  lp.add_var(150.0, 0.0, kInf);
  lp.add_var(-0.02, 0.0, kInf);
  lp.add_var(6.0, 0.0, kInf);
  int r1 = lp.add_row(RowSense::LE, 0.0);
  int r2 = lp.add_row(RowSense::LE, 0.0);
  int r3 = lp.add_row(RowSense::LE, 1.0);
  lp.add_entry(0, r1, 0.25);
  lp.add_entry(1, r1, -60.0);
  lp.add_entry(2, r1, -0.04);
  lp.add_entry(3, r1, 9.0);
  lp.add_entry(0, r2, 0.5);
  lp.add_entry(1, r2, -90.0);
  lp.add_entry(2, r2, -0.02);
  lp.add_entry(3, r2, 3.0);
  lp.add_entry(2, r3, 1.0);
  auto sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(-0.05).epsilon(1e-6));
}

TEST_CASE("agreement with vertex enumeration on tiny random LPs") {
  int solved = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    int n = 2 + static_cast<int>(seed % 3);  // 2..4 vars
    int m = 2 + static_cast<int>((seed / 3) % 5);  // 2..6 rows
    LinearProgram lp = random_feasible_lp(seed * 1337, n, m);
    VertexOracle oracle(lp);
    double ref = oracle.run();
    auto sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    REQUIRE(oracle.feasible_found);
    CHECK(sol.objective == doctest::Approx(ref).epsilon(1e-6));
    ++solved;
  }
  CHECK(solved == 60);
}

TEST_CASE("strong duality and complementary slackness on random LPs") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    int n = 3 + static_cast<int>(seed % 40);
    int m = 3 + static_cast<int>((seed * 7) % 40);
    LinearProgram lp = random_feasible_lp(seed * 997 + 5, n, m);
    auto sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);

    // dual objective: y'b + bound terms via reduced costs
    double dual_obj = 0.0;
    for (int r = 0; r < lp.num_rows(); ++r) dual_obj += sol.duals[r] * lp.rhs[r];
    for (int j = 0; j < lp.num_vars(); ++j) {
      double d = sol.reduced_costs[j];
      if (d > 0 && lp.lower[j] > -kInf) dual_obj += d * lp.lower[j];
      if (d < 0 && lp.upper[j] < kInf) dual_obj += d * lp.upper[j];
    }
    CHECK(std::abs(dual_obj - sol.objective) <= 1e-6 * (1 + std::abs(sol.objective)));

    for (int r = 0; r < lp.num_rows(); ++r) {
      double slack = lp.rhs[r] - row_activity(lp, sol.x, r);
      CHECK(std::abs(sol.duals[r] * slack) <= 1e-6 * (1 + std::abs(lp.rhs[r])));
      // sign convention: GE duals >= 0, LE duals <= 0
      if (lp.sense[r] == RowSense::GE) CHECK(sol.duals[r] >= -1e-7);
      if (lp.sense[r] == RowSense::LE) CHECK(sol.duals[r] <= 1e-7);
    }
  }
}

TEST_CASE("warm start after adding a column") {
  // solve, add a cheap column, re-solve warm; result matches cold solve
  LinearProgram lp;
  lp.add_var(2.0, 0.0, kInf);
  int r = lp.add_row(RowSense::GE, 4.0);
  lp.add_entry(0, r, 1.0);
  auto sol1 = solve_lp(lp);
  REQUIRE(sol1.status == LpStatus::Optimal);
  CHECK(sol1.objective == doctest::Approx(8.0));

  lp.add_var(1.0, 0.0, kInf);
  lp.add_entry(1, r, 1.0);
  Basis warm = sol1.basis;
  warm.state.insert(warm.state.begin() + 1, Basis::kAtLower);  // new structural var
  for (int& b : warm.basic)
    if (b >= 1) ++b;  // slack indices shifted by the inserted column
  auto sol2 = solve_lp(lp, {}, &warm);
  REQUIRE(sol2.status == LpStatus::Optimal);
  CHECK(sol2.objective == doctest::Approx(4.0));
  auto cold = solve_lp(lp);
  CHECK(cold.objective == doctest::Approx(sol2.objective));
}

TEST_CASE("iteration limit returns a flagged result") {
  LinearProgram lp = random_feasible_lp(42, 10, 10);
  LpOptions opts;
  opts.iter_limit = 1;
  auto sol = solve_lp(lp, opts);
  CHECK(sol.status == LpStatus::IterationLimit);
}

TEST_CASE("lp text dump is printable") {
  LinearProgram lp;
  lp.add_var(1.0, 0.0, 2.0);
  int r = lp.add_row(RowSense::LE, 1.0);
  lp.add_entry(0, r, 1.0);
  std::ostringstream os;
  write_lp_text(os, lp);
  CHECK(os.str().find("Minimize") != std::string::npos);
}
