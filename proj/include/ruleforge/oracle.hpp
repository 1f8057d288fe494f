#pragma once

#include <vector>

#include "ruleforge/dataset.hpp"
#include "ruleforge/master.hpp"
#include "ruleforge/rules.hpp"

namespace ruleforge {

struct OracleBudget {
  long long max_evaluations = 10'000'000;
};

// All nonempty literal subsets of size <= max_literals, canonical order.
std::vector<Rule> enumerate_rules(const BinaryDataset& ds, int max_literals,
                                  const OracleBudget& budget = {});

struct OracleResult {
  RuleSet rule_set;
  long long objective = 0;
  bool feasible = true;  // false when no subset meets the fairness constraints
};

// Exact optimum by exhaustive subset search over an explicit candidate list.
// Fairness constraints are evaluated by definition on the decoded rule set:
// true FNR gaps for equality of opportunity, normalized Hamming FP terms for
// the equalized-odds proxy, true FPR gaps for the exact 0-1 variant.
OracleResult brute_force_optimal_over(const BinaryDataset& ds,
                                      const std::vector<Rule>& candidates,
                                      const MasterConfig& cfg,
                                      const OracleBudget& budget = {});

// Same, over every rule with at most max_literals literals.
OracleResult brute_force_optimal(const BinaryDataset& ds, int complexity_bound,
                                 int max_literals, Objective objective,
                                 FairnessMode fairness = FairnessMode::None,
                                 double eps1 = 0.0, double eps2 = 0.0,
                                 const OracleBudget& budget = {});

}  // namespace ruleforge
