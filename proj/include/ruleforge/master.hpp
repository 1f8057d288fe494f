#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ruleforge/dataset.hpp"
#include "ruleforge/lp.hpp"
#include "ruleforge/mip.hpp"
#include "ruleforge/rules.hpp"

namespace ruleforge {

enum class Objective { Hamming, ZeroOneDisagg, ZeroOneAgg };

enum class FairnessMode { None, EqOpportunity, HammingEqOdds, ExactEqOdds01 };

struct MasterConfig {
  Objective objective = Objective::Hamming;
  int complexity_bound = 10;  // C
  FairnessMode fairness = FairnessMode::None;
  double eps1 = 0.0;
  double eps2 = 0.0;
  int big_m = 0;  // ZeroOneAgg only; 0 = floor(C/2), the max rule count
};

// Sign-normalized dual prices of the restricted master LP. mu/alpha are
// indexed by position within ds.positives(), nu by position within
// ds.negatives().
struct DualPrices {
  std::vector<double> mu;     // misclassification rows, >= 0
  double lambda = 0.0;        // complexity row, >= 0
  std::vector<double> alpha;  // true-positive tracking rows (fairness), >= 0
  double gamma1 = 0.0, gamma2 = 0.0;  // FN-gap rows (reported, unused in pricing)
  double gamma3 = 0.0, gamma4 = 0.0;  // FP-side rows
  std::vector<double> nu;     // aggregated 0-1 rows (ZeroOneAgg), >= 0
  std::vector<double> raw_rows;  // unnormalized LP duals, one per row
};

struct RmlpResult {
  LpSolution solution;
  DualPrices duals;
  double objective = 0.0;
};

struct MasterMipResult {
  MipSolution mip;
  RuleSet incumbent;                 // decoded incumbent (empty if none)
  std::vector<RuleSet> pool;         // decoded solution pool
  std::vector<double> pool_objectives;
};

// The restricted master problem: one w column per registered rule, zeta
// columns per sample as the objective variant requires, complexity row, and
// the configured fairness rows. The LP relaxation keeps w unbounded above
// (the cycling mitigation); the MIP restores w and zeta binary.
class MasterModel {
 public:
  MasterModel(const BinaryDataset& ds, const std::vector<Rule>& rules,
              const MasterConfig& cfg);

  const MasterConfig& config() const { return cfg_; }
  const BinaryDataset& dataset() const { return *ds_; }
  const LinearProgram& lp() const { return lp_; }
  int num_rules() const { return static_cast<int>(rules_.size()); }
  const std::vector<Rule>& rules() const { return rules_; }

  // Registers the rule and populates its column. Re-adding returns the
  // existing column index and leaves the model unchanged.
  int add_column(const Rule& rule);
  bool contains(const Rule& rule) const { return index_.count(rule) > 0; }

  // Column index of a registered rule's w variable.
  int column_of(const Rule& rule) const;

  RmlpResult solve_rmlp();

  // Reduced cost of a rule under the given dual prices. For rules already in
  // the registry under the disaggregated 0-1 objective this includes the
  // duals of the rule's own false-positive rows.
  double reduced_cost(const Rule& rule, const DualPrices& dp) const;

  // LP-algebra reduced cost of a registered column: obj coeff minus
  // duals^T column. Cross-checks column construction.
  double algebraic_reduced_cost(int w_column, const DualPrices& dp) const;

  MasterMipResult solve_rmip(double time_limit_s,
                             const MipLimits& base_limits = {});

  RuleSet decode(const std::vector<double>& x) const;

  int first_w_column() const { return first_w_col_; }

 private:
  void add_fixed_rows_and_columns();
  void fill_column(const Rule& rule, int col);

  const BinaryDataset* ds_;
  MasterConfig cfg_;
  LinearProgram lp_;
  std::vector<Rule> rules_;
  std::vector<Bitset> rule_cov_;
  std::map<Rule, int> index_;  // rule -> registry position

  std::vector<int> zeta_p_col_, zeta_n_col_;
  std::vector<int> p_row_;       // one per positive sample
  int complexity_row_ = -1;
  std::vector<int> mmisp2_row_;  // one per positive sample (fairness)
  int eo1_row_ = -1, eo2_row_ = -1;
  int eo3_row_ = -1, eo4_row_ = -1;
  std::vector<int> agg_row_;     // one per negative sample (ZeroOneAgg)
  std::vector<std::vector<int>> disagg_rows_;  // per registry rule (ZeroOneDisagg)
  int first_w_col_ = 0;

  std::optional<Basis> warm_;
  LpFactor factor_;
};

// Pool Select: entry with the lowest 0-1 loss; ties broken by lower Hamming
// loss, then lower total complexity, then first found.
RuleSet pool_select(const std::vector<RuleSet>& pool, const BinaryDataset& ds);

// Valid lower bound on the master MIP optimum given the last RMLP value and a
// valid bound on the final pricing optimum, clamped at zero (the objective is
// a nonnegative count).
int mip_lower_bound(double z_rmlp, double z_cg, int complexity_bound);

}  // namespace ruleforge
