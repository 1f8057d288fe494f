#include "ruleforge/master.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ruleforge {

namespace {

bool is_zero_one(Objective o) {
  return o == Objective::ZeroOneDisagg || o == Objective::ZeroOneAgg;
}

}  // namespace

MasterModel::MasterModel(const BinaryDataset& ds, const std::vector<Rule>& rules,
                         const MasterConfig& cfg)
    : ds_(&ds), cfg_(cfg) {
  if (cfg_.complexity_bound < 2)
    throw std::invalid_argument("complexity bound must be at least 2");
  if (cfg_.fairness != FairnessMode::None && !ds.has_groups())
    throw std::invalid_argument("fairness requested without groups");
  if (cfg_.fairness == FairnessMode::ExactEqOdds01 && !is_zero_one(cfg_.objective))
    throw std::invalid_argument("exact equalized odds requires a 0-1 objective");
  if (cfg_.eps1 < 0 || cfg_.eps1 > 1 || cfg_.eps2 < 0 || cfg_.eps2 > 1)
    throw std::invalid_argument("fairness tolerances must lie in [0,1]");
  if (cfg_.big_m <= 0) cfg_.big_m = cfg_.complexity_bound / 2;

  add_fixed_rows_and_columns();
  for (const Rule& r : rules) add_column(r);
}

void MasterModel::add_fixed_rows_and_columns() {
  const BinaryDataset& ds = *ds_;
  const auto& pos = ds.positives();
  const auto& neg = ds.negatives();
  bool fair = cfg_.fairness != FairnessMode::None;

  // rows first so columns can reference them
  p_row_.resize(pos.size());
  for (std::size_t t = 0; t < pos.size(); ++t) p_row_[t] = lp_.add_row(RowSense::GE, 1.0);
  complexity_row_ = lp_.add_row(RowSense::LE, cfg_.complexity_bound);
  if (fair) {
    mmisp2_row_.resize(pos.size());
    for (std::size_t t = 0; t < pos.size(); ++t)
      mmisp2_row_[t] = lp_.add_row(RowSense::LE, cfg_.complexity_bound);
    eo1_row_ = lp_.add_row(RowSense::LE, cfg_.eps1);
    eo2_row_ = lp_.add_row(RowSense::LE, cfg_.eps1);
    if (cfg_.fairness == FairnessMode::HammingEqOdds ||
        cfg_.fairness == FairnessMode::ExactEqOdds01) {
      eo3_row_ = lp_.add_row(RowSense::LE, cfg_.eps2);
      eo4_row_ = lp_.add_row(RowSense::LE, cfg_.eps2);
    }
  }
  if (cfg_.objective == Objective::ZeroOneAgg) {
    agg_row_.resize(neg.size());
    for (std::size_t t = 0; t < neg.size(); ++t) agg_row_[t] = lp_.add_row(RowSense::LE, 0.0);
  }

  // zeta columns for positives
  zeta_p_col_.resize(pos.size());
  for (std::size_t t = 0; t < pos.size(); ++t) {
    int col = lp_.add_var(1.0, 0.0, 1.0);
    zeta_p_col_[t] = col;
    lp_.add_entry(col, p_row_[t], 1.0);
    if (fair) lp_.add_entry(col, mmisp2_row_[t], cfg_.complexity_bound);
    if (fair) {
      int g = ds.group(pos[t]);
      double wp = 1.0 / static_cast<double>(ds.positives_of(g).size());
      lp_.add_entry(col, eo1_row_, g == 1 ? wp : -wp);
      lp_.add_entry(col, eo2_row_, g == 1 ? -wp : wp);
    }
  }
  // zeta columns for negatives under the 0-1 objectives
  if (is_zero_one(cfg_.objective)) {
    zeta_n_col_.resize(neg.size());
    for (std::size_t t = 0; t < neg.size(); ++t) {
      int col = lp_.add_var(1.0, 0.0, 1.0);
      zeta_n_col_[t] = col;
      if (cfg_.objective == Objective::ZeroOneAgg)
        lp_.add_entry(col, agg_row_[t], -static_cast<double>(cfg_.big_m));
      if (cfg_.fairness == FairnessMode::ExactEqOdds01) {
        int g = ds.group(neg[t]);
        double wn = 1.0 / static_cast<double>(ds.negatives_of(g).size());
        lp_.add_entry(col, eo3_row_, g == 1 ? wn : -wn);
        lp_.add_entry(col, eo4_row_, g == 1 ? -wn : wn);
      }
    }
  }
  first_w_col_ = lp_.num_vars();
}

void MasterModel::fill_column(const Rule& rule, int col) {
  const BinaryDataset& ds = *ds_;
  const Bitset& cov = rule_cov_.back();
  bool fair = cfg_.fairness != FairnessMode::None;

  const auto& pos = ds.positives();
  const auto& neg = ds.negatives();
  // entries must be appended in increasing row order: P rows, complexity,
  // MmisP2, eo rows, agg/disagg rows
  for (std::size_t t = 0; t < pos.size(); ++t)
    if (cov.test(pos[t])) lp_.add_entry(col, p_row_[t], 1.0);
  lp_.add_entry(col, complexity_row_, rule.complexity());
  if (fair) {
    for (std::size_t t = 0; t < pos.size(); ++t)
      if (cov.test(pos[t])) lp_.add_entry(col, mmisp2_row_[t], 2.0);  // beta_k = 2
  }
  if (cfg_.fairness == FairnessMode::HammingEqOdds) {
    double a = 0.0;
    for (int g = 1; g <= 2; ++g) {
      const auto& ng = ds.negatives_of(g);
      if (ng.empty()) continue;
      int covered = 0;
      for (int i : ng)
        if (cov.test(i)) ++covered;
      double term = static_cast<double>(covered) / static_cast<double>(ng.size());
      a += (g == 1) ? term : -term;
    }
    lp_.add_entry(col, eo3_row_, a);
    lp_.add_entry(col, eo4_row_, -a);
  }
  if (cfg_.objective == Objective::ZeroOneAgg) {
    for (std::size_t t = 0; t < neg.size(); ++t)
      if (cov.test(neg[t])) lp_.add_entry(col, agg_row_[t], 1.0);
  }
  if (cfg_.objective == Objective::ZeroOneDisagg) {
    // one new false-positive row per covered negative: w_k - zeta_i <= 0
    auto& rows = disagg_rows_.emplace_back();
    for (std::size_t t = 0; t < neg.size(); ++t) {
      if (!cov.test(neg[t])) continue;
      int row = lp_.add_row(RowSense::LE, 0.0);
      rows.push_back(row);
      lp_.add_entry(col, row, 1.0);
      lp_.add_entry(zeta_n_col_[t], row, -1.0);
    }
  } else {
    disagg_rows_.emplace_back();
  }
}

int MasterModel::add_column(const Rule& rule) {
  auto it = index_.find(rule);
  if (it != index_.end()) return first_w_col_ + it->second;
  if (!rule.empty() && rule.literals.back() >= ds_->num_features())
    throw std::out_of_range("rule literal out of range for dataset");

  int registry_pos = static_cast<int>(rules_.size());
  rules_.push_back(rule);
  rule_cov_.push_back(coverage(rule, *ds_));
  index_.emplace(rule, registry_pos);

  double obj = 0.0;
  if (cfg_.objective == Objective::Hamming)
    obj = rule_cov_.back().and_count(ds_->negative_mask());
  int old_nvars = lp_.num_vars();
  int old_nrows = lp_.num_rows();
  int col = lp_.add_var(obj, 0.0, kInf);  // no upper bound in the relaxation
  fill_column(rule, col);

  // Keep the warm basis aligned: the fresh column enters nonbasic at zero and
  // any rows grown for it get their (feasible) slacks appended as basic. The
  // cached factorization survives a pure column append (the basis matrix is
  // unchanged) but not row growth.
  if (warm_) {
    for (int& b : warm_->basic)
      if (b >= old_nvars) ++b;  // slack variable indices shift by one
    warm_->state.insert(warm_->state.begin() + col, Basis::kAtLower);
    factor_.shift_indices(old_nvars);
    for (int r = old_nrows; r < lp_.num_rows(); ++r) {
      warm_->basic.push_back(lp_.num_vars() + r);
      warm_->state.push_back(Basis::kBasic);
      factor_ = LpFactor{};  // row growth reshapes the basis matrix
    }
  }
  return col;
}

int MasterModel::column_of(const Rule& rule) const {
  auto it = index_.find(rule);
  if (it == index_.end()) throw std::out_of_range("rule not registered");
  return first_w_col_ + it->second;
}

RmlpResult MasterModel::solve_rmlp() {
  RmlpResult out;
  LpOptions opts;
  out.solution =
      solve_lp(lp_, opts, warm_ && warm_->valid() ? &*warm_ : nullptr, &factor_);
  if (out.solution.status == LpStatus::Optimal ||
      out.solution.status == LpStatus::IterationLimit)
    warm_ = out.solution.basis;
  out.objective = out.solution.objective;

  const auto& y = out.solution.duals;
  DualPrices& dp = out.duals;
  dp.raw_rows = y;
  if (y.empty()) return out;
  dp.mu.resize(p_row_.size());
  for (std::size_t t = 0; t < p_row_.size(); ++t) dp.mu[t] = std::max(0.0, y[p_row_[t]]);
  dp.lambda = std::max(0.0, -y[complexity_row_]);
  if (!mmisp2_row_.empty()) {
    dp.alpha.resize(mmisp2_row_.size());
    for (std::size_t t = 0; t < mmisp2_row_.size(); ++t)
      dp.alpha[t] = std::max(0.0, -y[mmisp2_row_[t]]);
  }
  if (eo1_row_ >= 0) dp.gamma1 = std::max(0.0, -y[eo1_row_]);
  if (eo2_row_ >= 0) dp.gamma2 = std::max(0.0, -y[eo2_row_]);
  if (eo3_row_ >= 0) dp.gamma3 = std::max(0.0, -y[eo3_row_]);
  if (eo4_row_ >= 0) dp.gamma4 = std::max(0.0, -y[eo4_row_]);
  if (!agg_row_.empty()) {
    dp.nu.resize(agg_row_.size());
    for (std::size_t t = 0; t < agg_row_.size(); ++t)
      dp.nu[t] = std::max(0.0, -y[agg_row_[t]]);
  }
  return out;
}

double MasterModel::reduced_cost(const Rule& rule, const DualPrices& dp) const {
  const BinaryDataset& ds = *ds_;
  Bitset cov = coverage(rule, ds);
  bool fair = cfg_.fairness != FairnessMode::None;

  double rc = dp.lambda * rule.complexity();
  const auto& pos = ds.positives();
  for (std::size_t t = 0; t < pos.size(); ++t) {
    if (!cov.test(pos[t])) continue;
    rc -= dp.mu[t];
    if (fair) rc += 2.0 * dp.alpha[t];
  }
  const auto& neg = ds.negatives();
  if (cfg_.objective == Objective::Hamming) {
    rc += cov.and_count(ds.negative_mask());
  } else if (cfg_.objective == Objective::ZeroOneAgg) {
    for (std::size_t t = 0; t < neg.size(); ++t)
      if (cov.test(neg[t])) rc += dp.nu[t];
  } else {
    // ZeroOneDisagg: only the rule's own rows carry duals; missing columns
    // have none yet
    auto it = index_.find(rule);
    if (it != index_.end() && !dp.raw_rows.empty()) {
      for (int row : disagg_rows_[it->second]) rc += std::max(0.0, -dp.raw_rows[row]);
    }
  }
  if (cfg_.fairness == FairnessMode::HammingEqOdds) {
    for (int g = 1; g <= 2; ++g) {
      const auto& ng = ds.negatives_of(g);
      if (ng.empty()) continue;
      int covered = 0;
      for (int i : ng)
        if (cov.test(i)) ++covered;
      double term = static_cast<double>(covered) / static_cast<double>(ng.size());
      double gsign = (g == 1) ? (dp.gamma3 - dp.gamma4) : (dp.gamma4 - dp.gamma3);
      rc += gsign * term;
    }
  }
  return rc;
}

double MasterModel::algebraic_reduced_cost(int w_column, const DualPrices& dp) const {
  double rc = lp_.obj[w_column];
  for (auto [row, coeff] : lp_.cols[w_column]) rc -= dp.raw_rows[row] * coeff;
  return rc;
}

RuleSet MasterModel::decode(const std::vector<double>& x) const {
  RuleSet rs;
  for (std::size_t k = 0; k < rules_.size(); ++k)
    if (x[first_w_col_ + k] > 0.5) rs.rules.push_back(rules_[k]);
  rs.finalize();
  return rs;
}

MasterMipResult MasterModel::solve_rmip(double time_limit_s, const MipLimits& base_limits) {
  MixedBinaryProgram p;
  p.lp = lp_;
  for (std::size_t k = 0; k < rules_.size(); ++k) {
    int col = first_w_col_ + static_cast<int>(k);
    p.lp.upper[col] = 1.0;
    p.binaries.push_back(col);
    p.branch_priority.push_back(col);  // rule selectors drive everything else
  }
  // zeta variables are integral automatically once w is integral, except
  // where a fairness row could float a tracked zeta (exactness then requires
  // the binary restriction) or the aggregated big-M row would undercount.
  bool fair = cfg_.fairness != FairnessMode::None;
  if (fair)
    for (int col : zeta_p_col_) p.binaries.push_back(col);
  bool zn_binary = cfg_.objective == Objective::ZeroOneAgg ||
                   cfg_.fairness == FairnessMode::ExactEqOdds01;
  if (zn_binary)
    for (int col : zeta_n_col_) p.binaries.push_back(col);
  std::sort(p.binaries.begin(), p.binaries.end());

  MipLimits limits = base_limits;
  limits.time_limit_s = time_limit_s;
  MasterMipResult out;
  // the last RMLP basis primes the root relaxation (same basis matrix; only
  // the w upper bounds differ)
  out.mip = solve_mip(p, limits, warm_ ? &*warm_ : nullptr,
                      factor_.basic.empty() ? nullptr : &factor_);
  if (out.mip.has_incumbent()) out.incumbent = decode(out.mip.x);
  for (const auto& entry : out.mip.pool) {
    out.pool.push_back(decode(entry.x));
    out.pool_objectives.push_back(entry.objective);
  }
  return out;
}

RuleSet pool_select(const std::vector<RuleSet>& pool, const BinaryDataset& ds) {
  if (pool.empty()) throw std::invalid_argument("pool_select on an empty pool");
  int best = 0;
  long long best01 = zero_one_loss(pool[0], ds);
  long long best_ham = hamming_loss(pool[0], ds);
  int best_cx = pool[0].total_complexity();
  for (std::size_t k = 1; k < pool.size(); ++k) {
    long long z01 = zero_one_loss(pool[k], ds);
    long long ham = hamming_loss(pool[k], ds);
    int cx = pool[k].total_complexity();
    bool better = z01 < best01 ||
                  (z01 == best01 && (ham < best_ham ||
                                     (ham == best_ham && cx < best_cx)));
    if (better) {
      best = static_cast<int>(k);
      best01 = z01;
      best_ham = ham;
      best_cx = cx;
    }
  }
  return pool[best];
}

int mip_lower_bound(double z_rmlp, double z_cg, int complexity_bound) {
  double corr = std::min(0.5 * complexity_bound * z_cg, 0.0);
  double bound = std::ceil(z_rmlp + corr - 1e-9);
  return std::max(0, static_cast<int>(bound));
}

}  // namespace ruleforge
