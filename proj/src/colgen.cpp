#include "ruleforge/colgen.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include "json.hpp"

namespace ruleforge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

enum class SizeClass { Small, Medium, Large };

SizeClass classify(const BinaryDataset& ds, const FitConfig& cfg) {
  int n = ds.num_samples(), d = ds.num_features();
  if (n <= cfg.small_rows && d <= cfg.small_cols) return SizeClass::Small;
  if (n > cfg.large_rows && d > cfg.large_cols) return SizeClass::Large;
  return SizeClass::Medium;
}

// Candidates from a subsampled pricing round carry subsample feature indices;
// translate them back before re-scoring on the full data.
Rule translate(const Rule& rule, const std::vector<int>& col_map) {
  std::vector<int> lits;
  lits.reserve(rule.literals.size());
  for (int j : rule.literals) lits.push_back(col_map[j]);
  return Rule(lits);
}

}  // namespace

FitResult fit(const BinaryDataset& ds, const FitConfig& cfg_in) {
  FitConfig cfg = cfg_in;
  if (ds.num_samples() == 0) throw std::invalid_argument("empty dataset");
  cfg.max_rule_literals =
      std::max(1, std::min(cfg.max_rule_literals, cfg.master.complexity_bound - 1));

  auto t0 = Clock::now();
  FitResult out;

  if (cfg.total_time_limit_s <= 0.0) {
    out.status = FitStatus::NoBudget;
    out.has_certificate = false;
    out.z_rmip = cfg.master.objective == Objective::Hamming
                     ? static_cast<double>(hamming_loss(out.rule_set, ds))
                     : static_cast<double>(zero_one_loss(out.rule_set, ds));
    return out;
  }

  MasterModel master(ds, {}, cfg.master);
  if (cfg.initial_columns == InitialColumns::Singletons)
    for (int j = 0; j < ds.num_features(); ++j) master.add_column(Rule({j}));

  SizeClass size_class = classify(ds, cfg);
  const double reserve = std::min(cfg.rmip_time_limit_s, 0.25 * cfg.total_time_limit_s);
  const bool disagg = cfg.master.objective == Objective::ZeroOneDisagg;

  std::optional<int> best_lb;
  double z_rmlp = 0.0;
  bool proved = false;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    double iter_start = seconds_since(t0);
    if (iter_start >= cfg.total_time_limit_s - reserve) break;

    auto rmlp = master.solve_rmlp();
    if (rmlp.solution.status == LpStatus::Infeasible) {
      out.status = FitStatus::Infeasible;
      out.wall_seconds = seconds_since(t0);
      return out;
    }
    z_rmlp = rmlp.objective;

    IterationRecord rec;
    rec.iteration = iter;
    rec.z_rmlp = z_rmlp;

    double remaining = cfg.total_time_limit_s - seconds_since(t0);
    double pricing_budget = std::min(cfg.pricing_time_limit_s, std::max(0.1, remaining));

    PricingInput in;
    in.ds = &ds;
    in.costs = make_pricing_costs(ds, cfg.master, rmlp.duals);
    in.max_literals = cfg.max_rule_literals;
    in.time_limit_s = pricing_budget;
    if (disagg) in.excluded = master.rules();

    PricingOutput priced;
    bool ran_exact_full = false;
    if (cfg.pricing == PricingMode::Heuristic) {
      priced = beam_search(in, cfg.beam_widths, cfg.diversity);
      rec.used_beam = true;
    } else if (cfg.pricing == PricingMode::Exact || size_class != SizeClass::Large) {
      priced = solve_pricing_exact(in);
      ran_exact_full = true;
    } else {
      // large instances: price on a per-iteration subsample
      auto sub = subsample(ds, cfg.seed + static_cast<std::uint64_t>(iter) * 7919 + 1,
                           cfg.subsample_targets);
      rec.used_subsample = sub.reduced;
      PricingInput sin;
      sin.ds = &sub.ds;
      sin.max_literals = cfg.max_rule_literals;
      sin.time_limit_s = pricing_budget;
      sin.subsampled = sub.reduced;
      sin.costs.lambda = in.costs.lambda;
      sin.costs.sample_cost.resize(sub.ds.num_samples());
      for (int i = 0; i < sub.ds.num_samples(); ++i)
        sin.costs.sample_cost[i] = in.costs.sample_cost[sub.row_map[i]];
      if (disagg) {
        // translated exclusions only make sense when all literals survive
        sin.excluded.clear();
      }
      auto sub_out = solve_pricing_exact(sin);
      priced.proven_optimal = false;
      priced.bound_valid = false;
      for (const auto& sr : sub_out.candidates)
        priced.candidates.push_back({translate(sr.rule, sub.col_map), sr.reduced_cost});
    }

    // fall back to the beam when the exact attempt produced nothing usable
    if (cfg.pricing == PricingMode::Hybrid && !rec.used_beam &&
        priced.candidates.empty() && !priced.proven_optimal) {
      auto beam_out = beam_search(in, cfg.beam_widths, cfg.diversity);
      rec.used_beam = true;
      for (const auto& sr : beam_out.candidates) priced.candidates.push_back(sr);
    }

    // any candidate enters only with a verified negative reduced cost on the
    // full dataset
    int added = 0;
    for (const auto& sr : priced.candidates) {
      if (master.contains(sr.rule)) continue;
      double rc = master.reduced_cost(sr.rule, rmlp.duals);
      if (rc < -1e-6) {
        master.add_column(sr.rule);
        ++added;
      }
    }

    rec.columns_added = added;
    rec.z_cg = priced.z_cg;
    rec.z_cg_bound_valid = priced.bound_valid && ran_exact_full;
    rec.pricing_proven_optimal = priced.proven_optimal && ran_exact_full;
    rec.seconds = seconds_since(t0) - iter_start;
    out.log.push_back(rec);

    if (rec.z_cg_bound_valid) {
      int lb = mip_lower_bound(z_rmlp, priced.z_cg, cfg.master.complexity_bound);
      if (!best_lb || lb > *best_lb) best_lb = lb;
    }
    if (added == 0) {
      proved = rec.pricing_proven_optimal && priced.z_cg >= -1e-6;
      break;
    }
  }

  out.z_rmlp_final = z_rmlp;
  out.mlp_proved_optimal = proved;

  auto rmip_budget_now = [&]() {
    double elapsed = seconds_since(t0);
    double b = std::min(cfg.rmip_time_limit_s,
                        std::max(reserve, cfg.total_time_limit_s - elapsed));
    return std::max(b, 0.5);
  };
  auto mip_res = master.solve_rmip(rmip_budget_now());

  if (mip_res.mip.status == MipStatus::Infeasible) {
    out.status = FitStatus::Infeasible;
    out.wall_seconds = seconds_since(t0);
    return out;
  }
  if (!mip_res.mip.has_incumbent()) {
    // ran out of time before any integer solution; fall back to the trivial
    // empty rule set without a certificate
    out.rule_set = RuleSet{};
    out.z_rmip = cfg.master.objective == Objective::Hamming
                     ? static_cast<double>(hamming_loss(out.rule_set, ds))
                     : static_cast<double>(zero_one_loss(out.rule_set, ds));
    out.has_certificate = false;
    out.columns_generated = master.num_rules();
    out.wall_seconds = seconds_since(t0);
    return out;
  }

  // Gap closing: with the MLP solved to optimality the restricted MIP can
  // still sit above the bound because the columns it needs price
  // nonnegatively. Pull further columns in reduced-cost order (pricing with
  // the registry excluded); exhausting the whole <=D rule space certifies the
  // incumbent as the global optimum.
  if (proved && best_lb) {
    auto rmlp = master.solve_rmlp();
    while (mip_res.mip.objective > *best_lb + 1e-9 &&
           seconds_since(t0) < cfg.total_time_limit_s - 0.05) {
      PricingInput in;
      in.ds = &ds;
      in.costs = make_pricing_costs(ds, cfg.master, rmlp.duals);
      in.max_literals = cfg.max_rule_literals;
      in.time_limit_s =
          std::min(cfg.pricing_time_limit_s, cfg.total_time_limit_s - seconds_since(t0));
      in.excluded = master.rules();
      PricingOutput next = price_best_columns(in, 32);
      if (next.candidates.empty()) {
        if (next.proven_optimal && mip_res.mip.status == MipStatus::Optimal) {
          // every rule within the depth bound is in the master: the incumbent
          // is the exact optimum
          best_lb = static_cast<int>(std::llround(mip_res.mip.objective));
        }
        break;
      }
      int added = 0;
      for (const auto& sr : next.candidates) {
        if (master.contains(sr.rule)) continue;
        master.add_column(sr.rule);
        ++added;
      }
      if (added == 0) break;
      mip_res = master.solve_rmip(rmip_budget_now());
      if (!mip_res.mip.has_incumbent()) break;
    }
  }

  out.z_rmip = mip_res.mip.objective;
  out.rmip_incumbent = mip_res.incumbent;
  out.rule_set = pool_select(mip_res.pool, ds);
  out.rule_set.finalize();
  out.columns_generated = master.num_rules();

  out.lower_bound = best_lb;
  if (best_lb) {
    out.optimality_gap = out.z_rmip - *best_lb;
    out.has_certificate = true;
  }
  out.rule_set.meta.objective = out.z_rmip;
  if (best_lb) {
    out.rule_set.meta.lower_bound = *best_lb;
    out.rule_set.meta.has_lower_bound = true;
    out.rule_set.meta.gap = *out.optimality_gap;
  }
  out.wall_seconds = seconds_since(t0);
  return out;
}

FitResult refit_over_columns(const BinaryDataset& ds, const std::vector<Rule>& columns,
                             const MasterConfig& cfg, double time_limit_s) {
  FitResult out;
  MasterModel master(ds, columns, cfg);
  auto rmlp = master.solve_rmlp();
  if (rmlp.solution.status == LpStatus::Optimal) out.z_rmlp_final = rmlp.objective;
  auto mip_res = master.solve_rmip(time_limit_s);
  if (mip_res.mip.status == MipStatus::Infeasible) {
    out.status = FitStatus::Infeasible;
    return out;
  }
  if (!mip_res.mip.has_incumbent()) {
    out.has_certificate = false;
    return out;
  }
  out.z_rmip = mip_res.mip.objective;
  out.rmip_incumbent = mip_res.incumbent;
  out.rule_set = pool_select(mip_res.pool, ds);
  out.rule_set.finalize();
  out.rule_set.meta.objective = out.z_rmip;
  out.columns_generated = static_cast<int>(columns.size());
  return out;
}

void write_iteration_log(std::ostream& os, const FitResult& result) {
  for (const auto& rec : result.log) {
    nlohmann::json j{{"iteration", rec.iteration},
                     {"z_rmlp", rec.z_rmlp},
                     {"columns_added", rec.columns_added},
                     {"z_cg", std::isfinite(rec.z_cg) ? rec.z_cg : -1e300},
                     {"bound_valid", rec.z_cg_bound_valid},
                     {"proven_optimal", rec.pricing_proven_optimal},
                     {"used_beam", rec.used_beam},
                     {"used_subsample", rec.used_subsample},
                     {"seconds", rec.seconds}};
    os << j.dump() << '\n';
  }
}

}  // namespace ruleforge
