#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ruleforge/dataset.hpp"
#include "ruleforge/master.hpp"
#include "ruleforge/pricing.hpp"

namespace ruleforge {

enum class PricingMode { Exact, Heuristic, Hybrid };
enum class InitialColumns { None, Singletons };

struct FitConfig {
  MasterConfig master;
  int max_rule_literals = 5;  // D; clamped to C-1
  double total_time_limit_s = 300.0;
  double pricing_time_limit_s = 45.0;
  double rmip_time_limit_s = 60.0;
  std::uint64_t seed = 0;
  PricingMode pricing = PricingMode::Hybrid;
  InitialColumns initial_columns = InitialColumns::None;
  SubsampleTargets subsample_targets;
  BeamWidths beam_widths;
  DiversityLimits diversity;
  // dataset size classes steering the hybrid schedule
  int small_rows = 2000, small_cols = 300;
  int large_rows = 5000, large_cols = 600;
  int max_iterations = 100000;
};

struct IterationRecord {
  int iteration = 0;
  double z_rmlp = 0.0;
  int columns_added = 0;
  double z_cg = 0.0;
  bool z_cg_bound_valid = false;
  bool pricing_proven_optimal = false;
  bool used_beam = false;
  bool used_subsample = false;
  double seconds = 0.0;
};

enum class FitStatus { Ok, Infeasible, NoBudget };

struct FitResult {
  FitStatus status = FitStatus::Ok;
  RuleSet rule_set;  // after Pool Select
  double z_rmlp_final = 0.0;
  double z_rmip = 0.0;
  std::optional<int> lower_bound;   // absent when no valid pricing bound exists
  std::optional<double> optimality_gap;
  bool mlp_proved_optimal = false;
  bool has_certificate = false;
  std::vector<IterationRecord> log;
  double wall_seconds = 0.0;
  int columns_generated = 0;
  RuleSet rmip_incumbent;  // the Hamming/0-1 optimal incumbent before Pool Select
};

// The column generation training loop: solve the restricted master LP, price
// for negative-reduced-cost rules, add every one found, repeat under the time
// budget, then solve the restricted MIP and apply Pool Select.
FitResult fit(const BinaryDataset& ds, const FitConfig& cfg);

// Restricted MIP + Pool Select over a fixed column set (the second-pass mode
// used after hyperparameter sweeps, and the evaluation path for fixtures with
// an explicit candidate rule space).
FitResult refit_over_columns(const BinaryDataset& ds, const std::vector<Rule>& columns,
                             const MasterConfig& cfg, double time_limit_s);

// JSON-lines iteration log, one object per line.
void write_iteration_log(std::ostream& os, const FitResult& result);

}  // namespace ruleforge
