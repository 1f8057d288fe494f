#include "ruleforge/lp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace ruleforge {

void LinearProgram::validate() const {
  if (obj.size() != cols.size() || lower.size() != cols.size() ||
      upper.size() != cols.size())
    throw std::invalid_argument("LP variable arrays are inconsistent");
  if (sense.size() != rhs.size())
    throw std::invalid_argument("LP row arrays are inconsistent");
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (std::isnan(obj[j])) throw std::invalid_argument("NaN objective coefficient");
    if (lower[j] > upper[j]) throw std::invalid_argument("empty variable bound range");
    if (lower[j] == -kInf && upper[j] == kInf)
      throw std::invalid_argument("free variables are unsupported");
    int prev = -1;
    for (auto [r, v] : cols[j]) {
      if (r < 0 || r >= num_rows()) throw std::invalid_argument("column entry row out of range");
      if (r <= prev) throw std::invalid_argument("column rows must be strictly increasing");
      if (std::isnan(v)) throw std::invalid_argument("NaN constraint coefficient");
      prev = r;
    }
  }
  for (double b : rhs)
    if (!std::isfinite(b)) throw std::invalid_argument("RHS must be finite");
}

void write_lp_text(std::ostream& os, const LinearProgram& lp) {
  os << "Minimize\n obj:";
  for (int j = 0; j < lp.num_vars(); ++j)
    if (lp.obj[j] != 0.0) os << ' ' << (lp.obj[j] >= 0 ? "+" : "") << lp.obj[j] << " x" << j;
  if (lp.obj_offset != 0.0) os << " + " << lp.obj_offset;
  os << "\nSubject To\n";
  std::vector<std::vector<std::pair<int, double>>> rows(lp.num_rows());
  for (int j = 0; j < lp.num_vars(); ++j)
    for (auto [r, v] : lp.cols[j]) rows[r].emplace_back(j, v);
  for (int r = 0; r < lp.num_rows(); ++r) {
    os << " c" << r << ":";
    for (auto [j, v] : rows[r]) os << ' ' << (v >= 0 ? "+" : "") << v << " x" << j;
    switch (lp.sense[r]) {
      case RowSense::LE: os << " <= "; break;
      case RowSense::GE: os << " >= "; break;
      case RowSense::EQ: os << " = "; break;
    }
    os << lp.rhs[r] << '\n';
  }
  os << "Bounds\n";
  for (int j = 0; j < lp.num_vars(); ++j)
    os << ' ' << lp.lower[j] << " <= x" << j << " <= " << lp.upper[j] << '\n';
  os << "End\n";
}

namespace {

// Bounded-variable revised simplex with a dense explicit basis inverse,
// product-form updates and periodic refactorization. Phase 1 minimizes the sum
// of bound violations of the basic variables (no artificial columns), which
// also lets a warm basis that turned infeasible be repaired in place. Pricing
// is Dantzig with a Bland fallback once the iteration stalls.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& opts)
      : lp_(lp),
        opts_(opts),
        m_(lp.num_rows()),
        n_(lp.num_vars()),
        nt_(n_ + m_),
        start_(std::chrono::steady_clock::now()) {
    lo_.resize(nt_);
    up_.resize(nt_);
    cost_.assign(nt_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lp.lower[j];
      up_[j] = lp.upper[j];
      cost_[j] = lp.obj[j];
    }
    for (int r = 0; r < m_; ++r) {
      switch (lp.sense[r]) {
        case RowSense::LE: lo_[n_ + r] = 0.0;   up_[n_ + r] = kInf; break;
        case RowSense::GE: lo_[n_ + r] = -kInf; up_[n_ + r] = 0.0;  break;
        case RowSense::EQ: lo_[n_ + r] = 0.0;   up_[n_ + r] = 0.0;  break;
      }
    }
  }

  LpSolution run(const Basis* warm, LpFactor* cache) {
    LpSolution out;
    if (m_ == 0) return solve_unconstrained();

    if (warm != nullptr && warm_usable(*warm)) {
      basic_ = warm->basic;
      state_ = warm->state;
      sanitize_states();
    } else {
      slack_basis();
    }
    bool have_factor = false;
    if (cache != nullptr && cache->basic == basic_ &&
        cache->binv.size() == static_cast<std::size_t>(m_) * m_) {
      binv_ = cache->binv;
      pivots_since_refactor_ = 0;
      have_factor = true;
    }
    if (!have_factor && !refactorize()) {
      slack_basis();
      refactorize();
    }
    compute_basic_values();

    bool feasible = max_infeasibility() <= opts_.feas_tol;
    int retries = 0;
    LpStatus status = LpStatus::Optimal;
    while (true) {
      if (!feasible) {
        status = phase1();
        if (status == LpStatus::Infeasible || status == LpStatus::IterationLimit) break;
      }
      status = phase2();
      if (status == LpStatus::IterationLimit) break;
      // Verify the terminal point against the original equations (catches
      // accumulated factorization drift); refactorize and keep iterating only
      // when something is off.
      if (residual_violation() > opts_.feas_tol * 10) {
        refactorize();
        compute_basic_values();
        feasible = max_infeasibility() <= opts_.feas_tol;
        if (++retries > 4) { status = LpStatus::IterationLimit; break; }
        continue;
      }
      if (status == LpStatus::Optimal && has_attractive_candidate()) {
        refactorize();
        compute_basic_values();
        feasible = max_infeasibility() <= opts_.feas_tol;
        if (++retries > 4) { status = LpStatus::IterationLimit; break; }
        if (feasible && !has_attractive_candidate()) break;
        continue;
      }
      break;
    }
    if (cache != nullptr && (status == LpStatus::Optimal || status == LpStatus::IterationLimit)) {
      cache->basic = basic_;
      cache->binv = binv_;
    }
    return extract(status);
  }

 private:
  static constexpr int kRefactorEvery = 128;

  const LinearProgram& lp_;
  LpOptions opts_;
  int m_, n_, nt_;
  std::vector<double> lo_, up_, cost_;
  std::vector<int> basic_;                // size m_
  std::vector<std::uint8_t> state_;       // size nt_
  std::vector<double> xb_;                // basic values, size m_
  std::vector<double> binv_;              // dense m_*m_, row-major
  int iters_ = 0;
  int pivots_since_refactor_ = 0;
  std::chrono::steady_clock::time_point start_;

  bool out_of_budget() const {
    if (iters_ >= opts_.iter_limit) return true;
    if (opts_.time_limit_s < kInf && (iters_ & 127) == 0) {
      double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      if (elapsed > opts_.time_limit_s) return true;
    }
    return false;
  }

  double lo(int j) const { return lo_[j]; }
  double up(int j) const { return up_[j]; }

  double nonbasic_value(int j) const {
    return state_[j] == Basis::kAtUpper ? up_[j] : lo_[j];
  }

  template <typename F>
  void for_col(int j, F&& f) const {
    if (j < n_) {
      for (auto [r, v] : lp_.cols[j]) f(r, v);
    } else {
      f(j - n_, 1.0);
    }
  }

  bool warm_usable(const Basis& w) const {
    if (static_cast<int>(w.basic.size()) != m_) return false;
    if (static_cast<int>(w.state.size()) != nt_) return false;
    std::vector<char> seen(nt_, 0);
    for (int b : w.basic) {
      if (b < 0 || b >= nt_ || seen[b]) return false;
      seen[b] = 1;
    }
    return true;
  }

  void sanitize_states() {
    for (int j = 0; j < nt_; ++j) {
      if (state_[j] == Basis::kBasic) continue;
      if (state_[j] == Basis::kAtLower && lo_[j] == -kInf) state_[j] = Basis::kAtUpper;
      if (state_[j] == Basis::kAtUpper && up_[j] == kInf) state_[j] = Basis::kAtLower;
    }
    for (int r = 0; r < m_; ++r) state_[basic_[r]] = Basis::kBasic;
  }

  void slack_basis() {
    basic_.resize(m_);
    state_.assign(nt_, Basis::kAtLower);
    for (int j = 0; j < n_; ++j)
      if (lo_[j] == -kInf) state_[j] = Basis::kAtUpper;
    for (int r = 0; r < m_; ++r) {
      basic_[r] = n_ + r;
      state_[n_ + r] = Basis::kBasic;
    }
  }

  // Gauss-Jordan inversion of the basis matrix with partial pivoting.
  bool refactorize() {
    std::vector<double> a(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int k = 0; k < m_; ++k)
      for_col(basic_[k], [&](int r, double v) { a[static_cast<std::size_t>(r) * m_ + k] = v; });
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[static_cast<std::size_t>(i) * m_ + i] = 1.0;

    for (int k = 0; k < m_; ++k) {
      int piv = -1;
      double best = 1e-11;
      for (int i = k; i < m_; ++i) {
        double v = std::abs(a[static_cast<std::size_t>(i) * m_ + k]);
        if (v > best) { best = v; piv = i; }
      }
      if (piv < 0) return false;
      if (piv != k) {
        for (int c = 0; c < m_; ++c) {
          std::swap(a[static_cast<std::size_t>(piv) * m_ + c], a[static_cast<std::size_t>(k) * m_ + c]);
          std::swap(binv_[static_cast<std::size_t>(piv) * m_ + c], binv_[static_cast<std::size_t>(k) * m_ + c]);
        }
      }
      double d = a[static_cast<std::size_t>(k) * m_ + k];
      double inv = 1.0 / d;
      for (int c = 0; c < m_; ++c) {
        a[static_cast<std::size_t>(k) * m_ + c] *= inv;
        binv_[static_cast<std::size_t>(k) * m_ + c] *= inv;
      }
      for (int i = 0; i < m_; ++i) {
        if (i == k) continue;
        double f = a[static_cast<std::size_t>(i) * m_ + k];
        if (f == 0.0) continue;
        for (int c = 0; c < m_; ++c) {
          a[static_cast<std::size_t>(i) * m_ + c] -= f * a[static_cast<std::size_t>(k) * m_ + c];
          binv_[static_cast<std::size_t>(i) * m_ + c] -= f * binv_[static_cast<std::size_t>(k) * m_ + c];
        }
      }
    }
    pivots_since_refactor_ = 0;
    return true;
  }

  void compute_basic_values() {
    std::vector<double> r(lp_.rhs);
    for (int j = 0; j < nt_; ++j) {
      if (state_[j] == Basis::kBasic) continue;
      double v = nonbasic_value(j);
      if (v != 0.0) for_col(j, [&](int row, double c) { r[row] -= c * v; });
    }
    xb_.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double* row = &binv_[static_cast<std::size_t>(i) * m_];
      double s = 0.0;
      for (int kk = 0; kk < m_; ++kk) s += row[kk] * r[kk];
      xb_[i] = s;
    }
  }

  double max_infeasibility() const {
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      int j = basic_[i];
      worst = std::max(worst, lo_[j] - xb_[i]);
      worst = std::max(worst, xb_[i] - up_[j]);
    }
    return worst;
  }

  // Max violation of Ax = b and of the basic bounds at the current point,
  // evaluated against the original data (independent of binv_).
  double residual_violation() const {
    std::vector<double> r(lp_.rhs);
    for (int j = 0; j < nt_; ++j) {
      double v;
      if (state_[j] == Basis::kBasic)
        continue;
      else
        v = nonbasic_value(j);
      if (v != 0.0) for_col(j, [&](int row, double c) { r[row] -= c * v; });
    }
    for (int i = 0; i < m_; ++i) {
      double v = xb_[i];
      if (v != 0.0) for_col(basic_[i], [&](int row, double c) { r[row] -= c * v; });
    }
    double worst = max_infeasibility();
    for (int row = 0; row < m_; ++row) worst = std::max(worst, std::abs(r[row]));
    return worst;
  }

  // w = Binv * column(j)
  void ftran(int j, std::vector<double>& w) const {
    w.assign(m_, 0.0);
    for_col(j, [&](int r, double v) {
      for (int i = 0; i < m_; ++i) w[i] += binv_[static_cast<std::size_t>(i) * m_ + r] * v;
    });
  }

  // y = cb^T Binv for the given basic cost vector
  void btran(const std::vector<double>& cb, std::vector<double>& y) const {
    y.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      double c = cb[i];
      if (c == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(i) * m_];
      for (int kk = 0; kk < m_; ++kk) y[kk] += c * row[kk];
    }
  }

  double dot_col(int j, const std::vector<double>& y) const {
    double s = 0.0;
    for_col(j, [&](int r, double v) { s += y[r] * v; });
    return s;
  }

  void update_binv(const std::vector<double>& w, int pos) {
    double piv = w[pos];
    double* prow = &binv_[static_cast<std::size_t>(pos) * m_];
    double inv = 1.0 / piv;
    for (int c = 0; c < m_; ++c) prow[c] *= inv;
    for (int i = 0; i < m_; ++i) {
      if (i == pos) continue;
      double f = w[i];
      if (f == 0.0) continue;
      double* row = &binv_[static_cast<std::size_t>(i) * m_];
      for (int c = 0; c < m_; ++c) row[c] -= f * prow[c];
    }
    ++pivots_since_refactor_;
  }

  struct Ratio {
    double t = kInf;
    int pos = -1;          // basis position of the blocking variable, -1 = entering bound flip
    bool to_upper = false; // bound the leaving variable ends at
  };

  // Step length until a basic variable blocks. In phase 1 a violated basic
  // blocks when it reaches the bound it violates (it leaves the basis exactly
  // feasible); basics inside their bounds block as usual.
  Ratio ratio_test(const std::vector<double>& w, int dir, int entering, bool phase1) const {
    Ratio best;
    if (up_[entering] < kInf && lo_[entering] > -kInf) best.t = up_[entering] - lo_[entering];
    double tol = opts_.feas_tol;
    for (int i = 0; i < m_; ++i) {
      if (std::abs(w[i]) <= opts_.pivot_tol) continue;
      int j = basic_[i];
      double s = -dir * w[i];  // d x_b[i] / d t
      double v = xb_[i];
      double t = kInf;
      bool to_upper = false;
      if (phase1 && v < lo_[j] - tol) {
        if (s > 0) { t = (lo_[j] - v) / s; to_upper = false; }
      } else if (phase1 && v > up_[j] + tol) {
        if (s < 0) { t = (up_[j] - v) / s; to_upper = true; }
      } else if (s > 0) {
        if (up_[j] < kInf) { t = (up_[j] - v) / s; to_upper = true; }
      } else {
        if (lo_[j] > -kInf) { t = (lo_[j] - v) / s; to_upper = false; }
      }
      if (t < -1e-12) t = 0.0;
      if (t < best.t - 1e-12 ||
          (t < best.t + 1e-12 && best.pos >= 0 &&
           std::abs(w[i]) > std::abs(w[best.pos]))) {
        best.t = std::max(t, 0.0);
        best.pos = i;
        best.to_upper = to_upper;
      }
    }
    return best;
  }

  void apply_step(int entering, int dir, const std::vector<double>& w, const Ratio& r) {
    double t = r.t;
    for (int i = 0; i < m_; ++i) xb_[i] -= dir * t * w[i];
    if (r.pos < 0) {  // bound flip
      state_[entering] = (dir > 0) ? Basis::kAtUpper : Basis::kAtLower;
      return;
    }
    int leaving = basic_[r.pos];
    state_[leaving] = r.to_upper ? Basis::kAtUpper : Basis::kAtLower;
    double enter_val = nonbasic_value(entering) + dir * t;
    update_binv(w, r.pos);
    basic_[r.pos] = entering;
    state_[entering] = Basis::kBasic;
    xb_[r.pos] = enter_val;
    if (pivots_since_refactor_ >= kRefactorEvery) {
      refactorize();
      compute_basic_values();
    }
  }

  // Entering-variable search. Eligible moves: at-lower with negative reduced
  // cost, at-upper with positive reduced cost. Returns -1 when none.
  int price(const std::vector<double>& y, bool phase1, bool bland, int* out_dir) const {
    int best = -1, best_dir = 0;
    double best_score = 0.0;
    const double tol = opts_.opt_tol;
    for (int j = 0; j < nt_; ++j) {
      if (state_[j] == Basis::kBasic) continue;
      if (lo_[j] == up_[j]) continue;
      double cj = phase1 ? 0.0 : cost_[j];
      double d = cj - dot_col(j, y);
      int dir = 0;
      if (state_[j] == Basis::kAtLower && d < -tol) dir = 1;
      else if (state_[j] == Basis::kAtUpper && d > tol) dir = -1;
      if (dir == 0) continue;
      if (bland) { *out_dir = dir; return j; }
      double score = std::abs(d);
      if (score > best_score + 1e-15) {
        best = j;
        best_dir = dir;
        best_score = score;
      }
    }
    *out_dir = best_dir;
    return best;
  }

  LpStatus phase1() {
    std::vector<double> cb(m_), y, w;
    int stall = 0;
    bool bland = false;
    const int stall_limit = std::max(200, 4 * m_);
    while (true) {
      if (out_of_budget()) return LpStatus::IterationLimit;
      double tol = opts_.feas_tol;
      bool any_infeasible = false;
      for (int i = 0; i < m_; ++i) {
        int j = basic_[i];
        if (xb_[i] < lo_[j] - tol) { cb[i] = -1.0; any_infeasible = true; }
        else if (xb_[i] > up_[j] + tol) { cb[i] = 1.0; any_infeasible = true; }
        else cb[i] = 0.0;
      }
      if (!any_infeasible) return LpStatus::Optimal;  // feasible basis reached
      btran(cb, y);
      int dir = 0;
      int q = price(y, /*phase1=*/true, bland, &dir);
      if (q < 0) return LpStatus::Infeasible;
      ftran(q, w);
      Ratio r = ratio_test(w, dir, q, /*phase1=*/true);
      if (r.t == kInf) {
        // Cannot happen with a strictly improving direction; treat as
        // numerical trouble and tighten pivoting.
        if (!bland) { bland = true; continue; }
        return LpStatus::Infeasible;
      }
      apply_step(q, dir, w, r);
      ++iters_;
      if (r.t <= 1e-10) { if (++stall > stall_limit) bland = true; }
      else { stall = 0; }
    }
  }

  LpStatus phase2() {
    std::vector<double> cb(m_), y, w;
    int stall = 0;
    bool bland = false;
    const int stall_limit = std::max(200, 4 * m_);
    while (true) {
      if (out_of_budget()) return LpStatus::IterationLimit;
      for (int i = 0; i < m_; ++i) cb[i] = cost_[basic_[i]];
      btran(cb, y);
      int dir = 0;
      int q = price(y, /*phase1=*/false, bland, &dir);
      if (q < 0) return LpStatus::Optimal;
      ftran(q, w);
      Ratio r = ratio_test(w, dir, q, /*phase1=*/false);
      if (r.t == kInf) return LpStatus::Unbounded;
      apply_step(q, dir, w, r);
      ++iters_;
      if (r.t <= 1e-10) { if (++stall > stall_limit) bland = true; }
      else { stall = 0; }
    }
  }

  bool has_attractive_candidate() {
    std::vector<double> cb(m_), y;
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basic_[i]];
    btran(cb, y);
    int dir = 0;
    return price(y, false, false, &dir) >= 0;
  }

  LpSolution solve_unconstrained() {
    LpSolution out;
    out.x.assign(n_, 0.0);
    out.reduced_costs = lp_.obj;
    for (int j = 0; j < n_; ++j) {
      if (lp_.obj[j] > 0) {
        if (lo_[j] == -kInf) { out.status = LpStatus::Unbounded; return out; }
        out.x[j] = lo_[j];
      } else if (lp_.obj[j] < 0) {
        if (up_[j] == kInf) { out.status = LpStatus::Unbounded; return out; }
        out.x[j] = up_[j];
      } else {
        out.x[j] = (lo_[j] > -kInf) ? lo_[j] : up_[j];
      }
      out.objective += lp_.obj[j] * out.x[j];
    }
    out.objective += lp_.obj_offset;
    out.status = LpStatus::Optimal;
    return out;
  }

  LpSolution extract(LpStatus status) {
    LpSolution out;
    out.status = status;
    out.iterations = iters_;
    out.basis.basic = basic_;
    out.basis.state = state_;
    if (status == LpStatus::Infeasible || status == LpStatus::Unbounded) return out;

    out.x.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j)
      if (state_[j] != Basis::kBasic) out.x[j] = nonbasic_value(j);
    for (int i = 0; i < m_; ++i)
      if (basic_[i] < n_) out.x[basic_[i]] = xb_[i];
    // Clamp basic round-off into the box.
    for (int j = 0; j < n_; ++j)
      out.x[j] = std::min(std::max(out.x[j], lo_[j]), up_[j]);

    std::vector<double> cb(m_), y;
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basic_[i]];
    btran(cb, y);
    out.duals = y;
    out.reduced_costs.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) out.reduced_costs[j] = cost_[j] - dot_col(j, y);
    out.objective = lp_.obj_offset;
    for (int j = 0; j < n_; ++j) out.objective += lp_.obj[j] * out.x[j];
    return out;
  }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opts, const Basis* warm,
                    LpFactor* cache) {
  lp.validate();
  Simplex s(lp, opts);
  return s.run(warm, cache);
}

}  // namespace ruleforge
