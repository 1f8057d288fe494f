#pragma once

#include <cstdint>
#include <vector>

#include "ruleforge/dataset.hpp"
#include "ruleforge/master.hpp"
#include "ruleforge/mip.hpp"
#include "ruleforge/rules.hpp"

namespace ruleforge {

// Per-sample objective coefficients of the pricing problem, indexed by sample
// id, plus the complexity price. Covers every objective/fairness variant:
// positives carry -mu_i (or 2 alpha_i - mu_i under fairness), negatives carry
// 1 under Hamming (with the equalized-odds group adjustment), the aggregated
// 0-1 row duals, or 0 under the disaggregated 0-1 objective.
struct PricingCosts {
  std::vector<double> sample_cost;
  double lambda = 0.0;
};

PricingCosts make_pricing_costs(const BinaryDataset& ds, const MasterConfig& cfg,
                                const DualPrices& dp);

struct PricingInput {
  const BinaryDataset* ds = nullptr;
  PricingCosts costs;
  int max_literals = 5;  // D
  double time_limit_s = 45.0;
  // rules the pricing IP must not regenerate (cycling mitigation for the
  // disaggregated 0-1 master, whose reduced costs ignore not-yet-built rows)
  std::vector<Rule> excluded;
  bool subsampled = false;
};

struct ScoredRule {
  Rule rule;
  double reduced_cost = 0.0;
};

struct PricingOutput {
  std::vector<ScoredRule> candidates;  // every reduced cost < -1e-6
  double z_cg = -kInf;
  // true when z_cg is a valid lower bound on the pricing optimum over the
  // priced dataset (beam results never are)
  bool bound_valid = false;
  // the IP was solved to optimality on the full dataset
  bool proven_optimal = false;
};

// Reduced cost of a rule under the given pricing costs (sums coefficients of
// covered samples plus lambda times complexity).
double rule_reduced_cost(const Rule& rule, const PricingInput& in);

// The pricing integer program over literal-selection variables z_j and
// coverage indicators delta_i. force_nonempty adds a support row that shuts
// out the all-zero assignment (used for a follow-up solve when the empty rule
// dominates the optimum).
MixedBinaryProgram build_pricing_ip(const PricingInput& in);
MixedBinaryProgram build_pricing_ip(const PricingInput& in, bool force_nonempty);

PricingOutput solve_pricing_exact(const PricingInput& in);

// Best columns outside in.excluded ordered by reduced cost, regardless of
// sign. Drives the gap-closing enrichment once the restricted LP has
// converged; proven_optimal with no candidates means the excluded set already
// exhausts the rule space.
PricingOutput price_best_columns(const PricingInput& in, int keep);

struct SubsampleTargets {
  int rows = 2000;
  long long nonzeros = 100000;  // matrix-cell budget: rows x kept features
};

struct SubsampleResult {
  BinaryDataset ds;
  std::vector<int> row_map;  // subsample row -> original row
  std::vector<int> col_map;  // subsample feature -> original feature
  bool reduced = false;
};

// Uniform row sample without replacement, then a uniform feature sample fitted
// to the cell budget. Deterministic for a given seed; datasets already under
// budget are returned unchanged.
SubsampleResult subsample(const BinaryDataset& ds, std::uint64_t seed,
                          const SubsampleTargets& targets = {});

// Safe-to-prune test for beam extensions: positive means no extension of the
// rule can have negative reduced cost.
double prune_bound(const Rule& rule, const PricingInput& in);

struct DiversityLimits {
  std::vector<int> per_prefix = {8, 4, 2, 2, 1};
};

// Stable filter keeping the best-scored rules per shared literal prefix.
std::vector<ScoredRule> diversify(std::vector<ScoredRule> scored,
                                  const DiversityLimits& limits = {});

struct BeamWidths {
  std::vector<int> widths = {50, 20, 6, 6, 5};
};

// Layer-wise greedy search over rule extensions with dual-based pruning and
// inherited exclusion lists. Returns all negative-reduced-cost rules seen,
// after diversity filtering. Never a valid global bound.
PricingOutput beam_search(const PricingInput& in, const BeamWidths& widths = {},
                          const DiversityLimits& limits = {});

}  // namespace ruleforge
