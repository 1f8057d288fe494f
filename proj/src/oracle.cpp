#include "ruleforge/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace ruleforge {

namespace {

long long binomial_sum(int d, int k) {
  long long total = 0, c = 1;
  for (int t = 1; t <= k && t <= d; ++t) {
    c = c * (d - t + 1) / t;
    total += c;
    if (total > (1LL << 40)) break;
  }
  return total;
}

struct SubsetSearch {
  const BinaryDataset& ds;
  const std::vector<Rule>& candidates;
  const MasterConfig& cfg;
  long long eval_budget;
  long long evals = 0;

  std::vector<Bitset> cov;
  std::vector<int> cx;
  std::vector<long long> fp_weight;  // per-rule Hamming FP count

  std::vector<int> chosen;
  std::vector<int> best_choice;
  long long best_value = -1;

  SubsetSearch(const BinaryDataset& d, const std::vector<Rule>& cands,
               const MasterConfig& c, long long budget)
      : ds(d), candidates(cands), cfg(c), eval_budget(budget) {
    for (const Rule& r : candidates) {
      cov.push_back(coverage(r, ds));
      cx.push_back(r.complexity());
      fp_weight.push_back(cov.back().and_count(ds.negative_mask()));
    }
  }

  bool fairness_ok(const RuleSet& rs) const {
    if (cfg.fairness == FairnessMode::None) return true;
    auto rep = fairness_metrics(rs, ds);
    const double tol = 1e-9;
    if (rep.eqopp_gap > cfg.eps1 + tol) return false;
    if (cfg.fairness == FairnessMode::HammingEqOdds) {
      if (std::abs(rep.hamming_fp[0] - rep.hamming_fp[1]) > cfg.eps2 + tol) return false;
    } else if (cfg.fairness == FairnessMode::ExactEqOdds01) {
      if (std::abs(rep.fpr[0] - rep.fpr[1]) > cfg.eps2 + tol) return false;
    }
    return true;
  }

  long long evaluate() {
    RuleSet rs;
    for (int k : chosen) rs.rules.push_back(candidates[k]);
    if (!fairness_ok(rs)) return -1;
    long long v;
    if (cfg.objective == Objective::Hamming)
      v = hamming_loss(rs, ds);
    else
      v = zero_one_loss(rs, ds);
    return v;
  }

  void consider() {
    ++evals;
    if (evals > eval_budget) throw std::runtime_error("oracle evaluation budget exceeded");
    long long v = evaluate();
    if (v < 0) return;
    if (best_value < 0 || v < best_value) {
      best_value = v;
      best_choice = chosen;
    }
  }

  void search(int start, int complexity_left) {
    consider();
    for (int k = start; k < static_cast<int>(candidates.size()); ++k) {
      if (cx[k] > complexity_left) continue;
      chosen.push_back(k);
      search(k + 1, complexity_left - cx[k]);
      chosen.pop_back();
    }
  }
};

}  // namespace

std::vector<Rule> enumerate_rules(const BinaryDataset& ds, int max_literals,
                                  const OracleBudget& budget) {
  int d = ds.num_features();
  if (binomial_sum(d, max_literals) > budget.max_evaluations)
    throw std::runtime_error("rule enumeration exceeds the oracle budget");
  std::vector<Rule> out;
  std::vector<int> lits;
  auto rec = [&](auto&& self, int start) -> void {
    if (!lits.empty()) out.emplace_back(lits);
    if (static_cast<int>(lits.size()) == max_literals) return;
    for (int j = start; j < d; ++j) {
      lits.push_back(j);
      self(self, j + 1);
      lits.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

OracleResult brute_force_optimal_over(const BinaryDataset& ds,
                                      const std::vector<Rule>& candidates,
                                      const MasterConfig& cfg,
                                      const OracleBudget& budget) {
  SubsetSearch search(ds, candidates, cfg, budget.max_evaluations);
  search.search(0, cfg.complexity_bound);
  OracleResult out;
  if (search.best_value < 0) {
    out.feasible = false;
    return out;
  }
  out.objective = search.best_value;
  for (int k : search.best_choice) out.rule_set.rules.push_back(candidates[k]);
  out.rule_set.finalize();
  out.rule_set.meta.objective = static_cast<double>(out.objective);
  return out;
}

OracleResult brute_force_optimal(const BinaryDataset& ds, int complexity_bound,
                                 int max_literals, Objective objective,
                                 FairnessMode fairness, double eps1, double eps2,
                                 const OracleBudget& budget) {
  MasterConfig cfg;
  cfg.objective = objective;
  cfg.complexity_bound = complexity_bound;
  cfg.fairness = fairness;
  cfg.eps1 = eps1;
  cfg.eps2 = eps2;
  auto candidates = enumerate_rules(ds, max_literals, budget);
  return brute_force_optimal_over(ds, candidates, cfg, budget);
}

}  // namespace ruleforge
