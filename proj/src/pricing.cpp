#include "ruleforge/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <chrono>
#include <random>
#include <set>
#include <stdexcept>

namespace ruleforge {

namespace {

constexpr double kNegativeTol = 1e-6;

// Deterministic uniform integer in [0, n) by rejection; avoids the
// implementation-defined std::uniform_int_distribution.
std::uint64_t next_below(std::mt19937_64& rng, std::uint64_t n) {
  std::uint64_t lim = std::numeric_limits<std::uint64_t>::max() -
                      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= lim);
  return x % n;
}

std::vector<int> sample_without_replacement(std::mt19937_64& rng, int n, int k) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    int j = i + static_cast<int>(next_below(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

PricingCosts make_pricing_costs(const BinaryDataset& ds, const MasterConfig& cfg,
                                const DualPrices& dp) {
  PricingCosts costs;
  costs.lambda = dp.lambda;
  costs.sample_cost.assign(ds.num_samples(), 0.0);
  bool fair = cfg.fairness != FairnessMode::None;

  const auto& pos = ds.positives();
  for (std::size_t t = 0; t < pos.size(); ++t) {
    double c = -dp.mu[t];
    if (fair && !dp.alpha.empty()) c += 2.0 * dp.alpha[t];
    costs.sample_cost[pos[t]] = c;
  }
  const auto& neg = ds.negatives();
  for (std::size_t t = 0; t < neg.size(); ++t) {
    double c = 0.0;
    switch (cfg.objective) {
      case Objective::Hamming: c = 1.0; break;
      case Objective::ZeroOneAgg: c = dp.nu.empty() ? 0.0 : dp.nu[t]; break;
      case Objective::ZeroOneDisagg: c = 0.0; break;
    }
    if (cfg.fairness == FairnessMode::HammingEqOdds) {
      int g = ds.group(neg[t]);
      double size = static_cast<double>(ds.negatives_of(g).size());
      double adj = (g == 1 ? dp.gamma3 - dp.gamma4 : dp.gamma4 - dp.gamma3) / size;
      c += adj;
    }
    costs.sample_cost[neg[t]] = c;
  }
  return costs;
}

double rule_reduced_cost(const Rule& rule, const PricingInput& in) {
  const BinaryDataset& ds = *in.ds;
  Bitset cov = coverage(rule, ds);
  double rc = in.costs.lambda * rule.complexity();
  cov.for_each_set([&](int i) { rc += in.costs.sample_cost[i]; });
  return rc;
}

MixedBinaryProgram build_pricing_ip(const PricingInput& in) {
  return build_pricing_ip(in, false);
}

MixedBinaryProgram build_pricing_ip(const PricingInput& in, bool force_nonempty) {
  const BinaryDataset& ds = *in.ds;
  int n = ds.num_samples();
  int d = ds.num_features();
  int D = in.max_literals;
  if (D < 1) throw std::invalid_argument("rule literal bound must be >= 1");

  MixedBinaryProgram p;
  // variables: z_0..z_{d-1}, then delta_0..delta_{n-1}; branching prefers the
  // literal selectors, whose coverage indicators follow from them
  for (int j = 0; j < d; ++j) {
    p.lp.add_var(in.costs.lambda, 0.0, 1.0);
    p.binaries.push_back(j);
    p.branch_priority.push_back(j);
  }
  for (int i = 0; i < n; ++i) {
    p.lp.add_var(in.costs.sample_cost[i], 0.0, 1.0);
    p.binaries.push_back(d + i);
  }
  p.lp.obj_offset = in.costs.lambda;

  // one row per sample: negative-coefficient samples get the big-D cap that
  // forbids claiming coverage past a zero feature, the rest get the forcing row
  for (int i = 0; i < n; ++i) {
    bool neg_coeff = in.costs.sample_cost[i] < 0.0;
    int row = p.lp.add_row(neg_coeff ? RowSense::LE : RowSense::GE,
                           neg_coeff ? static_cast<double>(D) : 1.0);
    (void)row;
  }
  int budget_row = p.lp.add_row(RowSense::LE, static_cast<double>(D));

  // z columns: an entry in the row of every sample whose feature j is zero
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i)
      if (!ds.bit(i, j)) p.lp.add_entry(j, i, 1.0);
    p.lp.add_entry(j, budget_row, 1.0);
  }
  for (int i = 0; i < n; ++i) {
    bool neg_coeff = in.costs.sample_cost[i] < 0.0;
    p.lp.add_entry(d + i, i, neg_coeff ? static_cast<double>(D) : 1.0);
  }

  // no-good cuts for excluded rules of eligible size
  for (const Rule& r : in.excluded) {
    if (static_cast<int>(r.literals.size()) > D || r.empty()) continue;
    int row = p.lp.add_row(RowSense::LE, static_cast<double>(r.literals.size()) - 1.0);
    std::size_t t = 0;
    for (int j = 0; j < d; ++j) {
      bool inside = t < r.literals.size() && r.literals[t] == j;
      if (inside) ++t;
      p.lp.add_entry(j, row, inside ? 1.0 : -1.0);
    }
  }
  if (force_nonempty) {
    int row = p.lp.add_row(RowSense::GE, 1.0);
    for (int j = 0; j < d; ++j) p.lp.add_entry(j, row, 1.0);
  }
  return p;
}

namespace {

// Exact pricing by depth-first search over canonical literal subsets. Each
// node costs one bitset AND plus a cost scan, so complete enumeration of the
// <=D rule space is feasible well past the sizes where the pricing IP stalls.
// Pruning uses the admissible completion bound: for any superset q of r,
// rho(q) >= lambda * (c_r + 1) + sum of the negative covered costs of r.
class ExactDfs {
 public:
  ExactDfs(const PricingInput& in, bool negatives_only, int keep)
      : in_(in), ds_(*in.ds), negatives_only_(negatives_only), keep_(keep) {
    double horizon = std::min(in.time_limit_s, 1e7);
    deadline_ = std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(horizon));
    excluded_ = std::set<Rule>(in.excluded.begin(), in.excluded.end());
  }

  static long long node_estimate(int d, int depth) {
    long long total = 0, c = 1;
    for (int t = 1; t <= depth && t <= d; ++t) {
      c = c * (d - t + 1) / t;
      total += c;
      if (total > (1LL << 40)) break;
    }
    return total;
  }

  // returns false when the time limit interrupted the search
  bool run() {
    int d = ds_.num_features();
    Bitset all(ds_.num_samples());
    all.fill();
    std::vector<int> lits;
    for (int j = 0; j < d && !interrupted_; ++j) descend(lits, all, j);
    return !interrupted_;
  }

  double min_rc() const { return min_rc_; }

  std::vector<ScoredRule> take() const {
    std::vector<ScoredRule> out(kept_.begin(), kept_.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.reduced_cost != b.reduced_cost) return a.reduced_cost < b.reduced_cost;
      return a.rule < b.rule;
    });
    return out;
  }

 private:
  double threshold() const {
    double t = negatives_only_ ? -kNegativeTol : kInf;
    if (static_cast<int>(kept_.size()) >= keep_ && !kept_.empty())
      t = std::min(t, worst_kept_);
    return t;
  }

  void refresh_worst() {
    worst_kept_ = -kInf;
    for (const auto& sr : kept_) worst_kept_ = std::max(worst_kept_, sr.reduced_cost);
  }

  void offer(const Rule& rule, double rc) {
    if (negatives_only_ && rc >= -kNegativeTol) return;
    if (excluded_.count(rule)) return;
    if (static_cast<int>(kept_.size()) < keep_) {
      kept_.push_back({rule, rc});
      refresh_worst();
      return;
    }
    if (rc >= worst_kept_) return;
    // replace the worst entry (ties by rule order for determinism)
    std::size_t worst = 0;
    for (std::size_t k = 1; k < kept_.size(); ++k) {
      if (kept_[k].reduced_cost > kept_[worst].reduced_cost ||
          (kept_[k].reduced_cost == kept_[worst].reduced_cost &&
           kept_[worst].rule < kept_[k].rule))
        worst = k;
    }
    kept_[worst] = {rule, rc};
    refresh_worst();
  }

  void descend(std::vector<int>& lits, const Bitset& cov, int j) {
    if (interrupted_) return;
    if ((++nodes_ & 4095) == 0 &&
        std::chrono::steady_clock::now() > deadline_) {
      interrupted_ = true;
      return;
    }
    Bitset next = cov;
    next &= ds_.column(j);
    lits.push_back(j);
    int complexity = static_cast<int>(lits.size()) + 1;

    double rc = in_.costs.lambda * complexity;
    double neg_sum = 0.0;
    next.for_each_set([&](int i) {
      double c = in_.costs.sample_cost[i];
      rc += c;
      if (c < 0) neg_sum += c;
    });
    bool skip = !excluded_.empty() && excluded_.count(Rule(lits)) > 0;
    if (!skip) {
      if (rc < min_rc_) min_rc_ = rc;
      if (rc < threshold()) offer(Rule(lits), rc);
    }

    if (static_cast<int>(lits.size()) < in_.max_literals && next.any()) {
      // descend while the subtree could still lower the tracked minimum or
      // supply a better kept entry
      double descend_bound = in_.costs.lambda * (complexity + 1) + neg_sum;
      if (descend_bound < std::max(threshold(), min_rc_)) {
        for (int nj = j + 1; nj < ds_.num_features() && !interrupted_; ++nj)
          descend(lits, next, nj);
      }
    }
    lits.pop_back();
  }

  const PricingInput& in_;
  const BinaryDataset& ds_;
  bool negatives_only_;
  int keep_;
  std::chrono::steady_clock::time_point deadline_;
  std::set<Rule> excluded_;
  std::vector<ScoredRule> kept_;
  double worst_kept_ = -kInf;
  double min_rc_ = kInf;
  long long nodes_ = 0;
  bool interrupted_ = false;
};

constexpr long long kDfsNodeBudget = 4'000'000;

void collect_candidates(const MipSolution& sol, const PricingInput& in,
                        std::map<Rule, double>& best) {
  int d = in.ds->num_features();
  for (const auto& entry : sol.pool) {
    std::vector<int> lits;
    for (int j = 0; j < d; ++j)
      if (entry.x[j] > 0.5) lits.push_back(j);
    Rule rule(lits);
    if (rule.empty()) continue;
    double rc = rule_reduced_cost(rule, in);
    if (rc >= -kNegativeTol) continue;
    auto it = best.find(rule);
    if (it == best.end() || rc < it->second) best[rule] = rc;
  }
}

}  // namespace

PricingOutput solve_pricing_exact(const PricingInput& in) {
  PricingOutput out;
  if (in.time_limit_s <= 0.0) return out;  // degenerate limit: no work, no bound

  // The combinatorial search dominates whenever the <=D rule space is
  // enumerable; the pricing IP takes over past that.
  if (ExactDfs::node_estimate(in.ds->num_features(), in.max_literals) <= kDfsNodeBudget) {
    ExactDfs dfs(in, /*negatives_only=*/true, /*keep=*/128);
    bool complete = dfs.run();
    out.candidates = dfs.take();
    if (complete) {
      out.z_cg = dfs.min_rc() < kInf ? dfs.min_rc() : 0.0;
      out.bound_valid = !in.subsampled;
      out.proven_optimal = !in.subsampled;
    } else if (!out.candidates.empty()) {
      out.z_cg = out.candidates.front().reduced_cost;  // best found, no bound
    }
    return out;
  }

  auto t0 = std::chrono::steady_clock::now();
  MixedBinaryProgram p = build_pricing_ip(in);
  MipLimits limits;
  limits.time_limit_s = in.time_limit_s;
  MipSolution sol = solve_mip(p, limits);

  std::map<Rule, double> best;
  collect_candidates(sol, in, best);

  if (sol.status == MipStatus::Optimal) {
    out.z_cg = sol.objective;
    out.bound_valid = !in.subsampled;
    out.proven_optimal = !in.subsampled;
  } else if (sol.best_bound > -kInf) {
    out.z_cg = sol.best_bound;
    out.bound_valid = !in.subsampled;
  }

  // The all-zero assignment (the empty rule, never a real column) can
  // dominate the IP. When it does, one more solve restricted to nonempty
  // supports recovers actual columns and the exact optimum over real rules.
  bool empty_won = sol.has_incumbent() && [&] {
    for (int j = 0; j < in.ds->num_features(); ++j)
      if (sol.x[j] > 0.5) return false;
    return true;
  }();
  if ((empty_won || best.empty()) && out.z_cg < -kNegativeTol) {
    double used = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double remaining = in.time_limit_s - used;
    if (remaining > 0.05) {
      MixedBinaryProgram p2 = build_pricing_ip(in, /*force_nonempty=*/true);
      MipLimits limits2;
      limits2.time_limit_s = remaining;
      MipSolution sol2 = solve_mip(p2, limits2);
      collect_candidates(sol2, in, best);
      if (sol2.status == MipStatus::Optimal) {
        out.z_cg = sol2.objective;
        out.bound_valid = !in.subsampled;
        out.proven_optimal = !in.subsampled;
      } else {
        // both bounds are valid for the nonempty optimum; keep the tighter
        if (sol2.best_bound > -kInf) out.z_cg = std::max(out.z_cg, sol2.best_bound);
        out.proven_optimal = false;
      }
    } else {
      out.proven_optimal = false;
    }
  }

  for (const auto& [rule, rc] : best) out.candidates.push_back({rule, rc});
  std::sort(out.candidates.begin(), out.candidates.end(), [](const auto& a, const auto& b) {
    if (a.reduced_cost != b.reduced_cost) return a.reduced_cost < b.reduced_cost;
    return a.rule < b.rule;
  });
  return out;
}

PricingOutput price_best_columns(const PricingInput& in, int keep) {
  PricingOutput out;
  if (in.time_limit_s <= 0.0) return out;

  if (ExactDfs::node_estimate(in.ds->num_features(), in.max_literals) <= kDfsNodeBudget) {
    ExactDfs dfs(in, /*negatives_only=*/false, keep);
    bool complete = dfs.run();
    out.candidates = dfs.take();
    out.proven_optimal = complete && !in.subsampled;
    if (complete && dfs.min_rc() < kInf) {
      out.z_cg = dfs.min_rc();
      out.bound_valid = !in.subsampled;
    }
    return out;
  }

  MixedBinaryProgram p = build_pricing_ip(in, /*force_nonempty=*/true);
  MipLimits limits;
  limits.time_limit_s = in.time_limit_s;
  MipSolution sol = solve_mip(p, limits);
  if (sol.status == MipStatus::Infeasible) {
    out.proven_optimal = !in.subsampled;  // the excluded set exhausts the space
    return out;
  }
  std::map<Rule, double> best;
  int d = in.ds->num_features();
  std::set<Rule> excluded(in.excluded.begin(), in.excluded.end());
  for (const auto& entry : sol.pool) {
    std::vector<int> lits;
    for (int j = 0; j < d; ++j)
      if (entry.x[j] > 0.5) lits.push_back(j);
    Rule rule(lits);
    if (rule.empty() || excluded.count(rule)) continue;
    double rc = rule_reduced_cost(rule, in);
    auto it = best.find(rule);
    if (it == best.end() || rc < it->second) best[rule] = rc;
  }
  for (const auto& [rule, rc] : best) out.candidates.push_back({rule, rc});
  std::sort(out.candidates.begin(), out.candidates.end(), [](const auto& a, const auto& b) {
    if (a.reduced_cost != b.reduced_cost) return a.reduced_cost < b.reduced_cost;
    return a.rule < b.rule;
  });
  if (static_cast<int>(out.candidates.size()) > keep) out.candidates.resize(keep);
  out.proven_optimal = sol.status == MipStatus::Optimal && !in.subsampled;
  return out;
}

SubsampleResult subsample(const BinaryDataset& ds, std::uint64_t seed,
                          const SubsampleTargets& targets) {
  if (targets.rows <= 0 || targets.nonzeros <= 0)
    throw std::invalid_argument("subsample targets must be positive");
  SubsampleResult out;
  int n = ds.num_samples();
  int d = ds.num_features();
  long long cells = static_cast<long long>(n) * d;
  if (n <= targets.rows && cells <= targets.nonzeros) {
    out.ds = ds;
    out.row_map.resize(n);
    out.col_map.resize(d);
    for (int i = 0; i < n; ++i) out.row_map[i] = i;
    for (int j = 0; j < d; ++j) out.col_map[j] = j;
    return out;
  }

  std::mt19937_64 rng(seed);
  int keep_rows = std::min(n, targets.rows);
  out.row_map = sample_without_replacement(rng, n, keep_rows);
  long long keep_cols_budget = targets.nonzeros / std::max(1, keep_rows);
  int keep_cols = static_cast<int>(std::min<long long>(d, std::max<long long>(1, keep_cols_budget)));
  out.col_map = sample_without_replacement(rng, d, keep_cols);
  out.reduced = true;

  out.ds = BinaryDataset(keep_rows, keep_cols);
  std::vector<std::int8_t> groups;
  for (int i = 0; i < keep_rows; ++i) {
    int src = out.row_map[i];
    for (int j = 0; j < keep_cols; ++j)
      out.ds.set_bit(i, j, ds.bit(src, out.col_map[j]));
    out.ds.set_label(i, ds.label(src));
    if (ds.has_groups()) groups.push_back(static_cast<std::int8_t>(ds.group(src)));
  }
  if (!groups.empty()) out.ds.set_groups(std::move(groups));
  out.ds.finalize();
  return out;
}

double prune_bound(const Rule& rule, const PricingInput& in) {
  const BinaryDataset& ds = *in.ds;
  Bitset cov = coverage(rule, ds);
  double bound = in.costs.lambda * (rule.complexity() + 1);
  const Bitset& pos = ds.positive_mask();
  cov.for_each_set([&](int i) {
    if (pos.test(i)) bound += in.costs.sample_cost[i];
  });
  return bound;
}

std::vector<ScoredRule> diversify(std::vector<ScoredRule> scored, const DiversityLimits& limits) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.reduced_cost != b.reduced_cost) return a.reduced_cost < b.reduced_cost;
    return a.rule < b.rule;
  });
  std::map<std::vector<int>, int> prefix_count;
  std::vector<ScoredRule> kept;
  for (auto& sr : scored) {
    const auto& lits = sr.rule.literals;
    std::size_t depth = std::min(lits.size(), limits.per_prefix.size());
    bool ok = true;
    for (std::size_t len = 1; len <= depth; ++len) {
      std::vector<int> prefix(lits.begin(), lits.begin() + len);
      if (prefix_count[prefix] >= limits.per_prefix[len - 1]) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (std::size_t len = 1; len <= depth; ++len) {
      std::vector<int> prefix(lits.begin(), lits.begin() + len);
      ++prefix_count[prefix];
    }
    kept.push_back(std::move(sr));
  }
  return kept;
}

namespace {

struct BeamEntry {
  Rule rule;
  Bitset cov;
  double rc = 0.0;
  std::vector<int> excluded;  // features no descendant may add (inherited)
};

}  // namespace

PricingOutput beam_search(const PricingInput& in, const BeamWidths& widths,
                          const DiversityLimits& limits) {
  const BinaryDataset& ds = *in.ds;
  int d = ds.num_features();
  const Bitset& pos_mask = ds.positive_mask();
  double lambda = in.costs.lambda;

  auto score = [&](const Bitset& cov, int complexity) {
    double rc = lambda * complexity;
    cov.for_each_set([&](int i) { rc += in.costs.sample_cost[i]; });
    return rc;
  };
  auto pos_term = [&](const Bitset& cov) {
    double s = 0.0;
    cov.for_each_set([&](int i) {
      if (pos_mask.test(i)) s += in.costs.sample_cost[i];
    });
    return s;
  };

  std::set<Rule> excluded_rules(in.excluded.begin(), in.excluded.end());

  // depth clipped to the per-rule literal bound
  int depth = std::min<int>(static_cast<int>(widths.widths.size()), in.max_literals);

  // features that cannot appear in any negative rule at all
  std::vector<bool> globally_excluded(d, false);
  for (int j = 0; j < d; ++j) {
    Bitset cov = ds.column(j);
    double contain = lambda * 2.0 + pos_term(cov);
    if (contain > 0.0) globally_excluded[j] = true;
  }

  std::map<Rule, double> found;
  auto record = [&](const Rule& r, double rc) {
    if (rc >= -kNegativeTol) return;
    if (excluded_rules.count(r)) return;
    auto it = found.find(r);
    if (it == found.end() || rc < it->second) found[r] = rc;
  };

  // Candidates are recorded per level only after truncation to the beam
  // width: the rules kept are "the best" of each level, and only those are
  // extended further.
  std::vector<BeamEntry> beam;
  for (int j = 0; j < d; ++j) {
    if (globally_excluded[j]) continue;
    BeamEntry e;
    e.rule = Rule({j});
    e.cov = ds.column(j);
    if (!e.cov.any()) continue;
    e.rc = score(e.cov, 2);
    beam.push_back(std::move(e));
  }
  auto by_score = [](const BeamEntry& a, const BeamEntry& b) {
    if (a.rc != b.rc) return a.rc < b.rc;
    return a.rule < b.rule;
  };
  std::sort(beam.begin(), beam.end(), by_score);
  if (static_cast<int>(beam.size()) > widths.widths[0]) beam.resize(widths.widths[0]);
  for (const auto& e : beam) record(e.rule, e.rc);

  for (int level = 1; level < depth; ++level) {
    std::vector<BeamEntry> next;
    std::set<Rule> seen;
    for (auto& entry : beam) {
      // extensions already hopeless for this subtree are pruned up front
      if (prune_bound(entry.rule, in) > 0.0) continue;
      std::vector<int> child_excluded = entry.excluded;
      for (int j = 0; j < d; ++j) {
        if (globally_excluded[j]) continue;
        if (std::binary_search(entry.rule.literals.begin(), entry.rule.literals.end(), j))
          continue;
        if (std::find(entry.excluded.begin(), entry.excluded.end(), j) != entry.excluded.end())
          continue;
        std::vector<int> lits = entry.rule.literals;
        lits.push_back(j);
        Rule q(lits);
        Bitset cov = entry.cov;
        cov &= ds.column(j);
        if (!cov.any()) continue;
        int cq = q.complexity();
        // no rule containing q can price negative: inherit the exclusion
        double contain = lambda * cq + pos_term(cov);
        if (contain > 0.0) {
          child_excluded.push_back(j);
          continue;
        }
        double rc = score(cov, cq);
        if (seen.count(q)) continue;
        seen.insert(q);
        BeamEntry e;
        e.rule = std::move(q);
        e.cov = std::move(cov);
        e.rc = rc;
        e.excluded = child_excluded;  // copied to every new rule
        next.push_back(std::move(e));
      }
    }
    std::sort(next.begin(), next.end(), by_score);
    if (static_cast<int>(next.size()) > widths.widths[level]) next.resize(widths.widths[level]);
    for (const auto& e : next) record(e.rule, e.rc);
    beam = std::move(next);
    if (beam.empty()) break;
  }

  PricingOutput out;
  std::vector<ScoredRule> scored;
  for (const auto& [rule, rc] : found) scored.push_back({rule, rc});
  out.candidates = diversify(std::move(scored), limits);
  if (!out.candidates.empty()) out.z_cg = out.candidates.front().reduced_cost;
  out.bound_valid = false;
  out.proven_optimal = false;
  return out;
}

}  // namespace ruleforge
