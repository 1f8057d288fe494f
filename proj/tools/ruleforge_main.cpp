// ruleforge: learns Boolean DNF/CNF rule-set classifiers by column generation
// under an explicit complexity budget, with optional group-fairness
// constraints. Subcommands: train, predict, evaluate, cv, sweep.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ruleforge/binarizer.hpp"
#include "ruleforge/colgen.hpp"
#include "ruleforge/model_io.hpp"
#include "ruleforge/oracle.hpp"

namespace rf = ruleforge;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInfeasible = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainOptions {
  std::string data_path;
  std::string target;
  std::string group;
  std::vector<std::string> categorical;
  char delimiter = ',';
  int complexity = 10;
  int rule_depth = 5;
  std::string objective = "hamming";
  std::string fairness = "none";
  double eps1 = 0.0;
  double eps2 = 0.0;
  double time_limit = 300.0;
  double pricing_time_limit = 45.0;
  double rmip_time_limit = 60.0;
  std::string pricing = "hybrid";
  std::uint64_t seed = 0;
  bool cnf = false;
  bool singleton_start = false;
};

rf::Objective parse_objective(const std::string& s) {
  if (s == "hamming") return rf::Objective::Hamming;
  if (s == "01-agg") return rf::Objective::ZeroOneAgg;
  if (s == "01-disagg") return rf::Objective::ZeroOneDisagg;
  throw UsageError("unknown objective: " + s);
}

rf::FairnessMode parse_fairness(const std::string& s) {
  if (s == "none") return rf::FairnessMode::None;
  if (s == "eqopp") return rf::FairnessMode::EqOpportunity;
  if (s == "eqodds") return rf::FairnessMode::HammingEqOdds;
  if (s == "eqodds-exact") return rf::FairnessMode::ExactEqOdds01;
  throw UsageError("unknown fairness mode: " + s);
}

rf::PricingMode parse_pricing(const std::string& s) {
  if (s == "exact") return rf::PricingMode::Exact;
  if (s == "heuristic") return rf::PricingMode::Heuristic;
  if (s == "hybrid") return rf::PricingMode::Hybrid;
  throw UsageError("unknown pricing mode: " + s);
}

void validate(const TrainOptions& o) {
  if (o.fairness != "none" && o.group.empty())
    throw UsageError("--fairness " + o.fairness + " requires --group");
  if (o.fairness == "eqodds-exact" && o.objective == "hamming")
    throw UsageError("--fairness eqodds-exact requires a 0-1 objective");
  if (o.complexity < 2) throw UsageError("--complexity must be at least 2");
  if (o.rule_depth < 1) throw UsageError("--rule-depth must be at least 1");
  parse_objective(o.objective);
  parse_fairness(o.fairness);
  parse_pricing(o.pricing);
}

rf::CsvOptions csv_options(const TrainOptions& o, bool require_target = true) {
  rf::CsvOptions c;
  c.delimiter = o.delimiter;
  c.target_column = o.target;
  c.group_column = o.group;
  c.require_target = require_target;
  for (const auto& col : o.categorical) c.kinds[col] = rf::ColumnKind::Categorical;
  return c;
}

rf::FitConfig fit_config(const TrainOptions& o) {
  rf::FitConfig cfg;
  cfg.master.objective = parse_objective(o.objective);
  cfg.master.complexity_bound = o.complexity;
  cfg.master.fairness = parse_fairness(o.fairness);
  cfg.master.eps1 = o.eps1;
  cfg.master.eps2 = o.eps2;
  cfg.max_rule_literals = o.rule_depth;
  cfg.total_time_limit_s = o.time_limit;
  cfg.pricing_time_limit_s = o.pricing_time_limit;
  cfg.rmip_time_limit_s = o.rmip_time_limit;
  cfg.seed = o.seed;
  cfg.pricing = parse_pricing(o.pricing);
  cfg.initial_columns =
      o.singleton_start ? rf::InitialColumns::Singletons : rf::InitialColumns::None;
  return cfg;
}

struct Trained {
  rf::Model model;
  rf::FitResult result;
};

Trained train_on_raw(const rf::RawDataset& raw, const TrainOptions& o) {
  auto bin = rf::binarize(raw);
  for (const auto& w : bin.warnings) std::cerr << "warning: " << w << '\n';
  rf::BinaryDataset ds = o.cnf ? rf::to_cnf_problem(bin.dataset) : bin.dataset;
  rf::FitResult res = rf::fit(ds, fit_config(o));
  if (res.status == rf::FitStatus::Infeasible)
    throw InfeasibleError("the fairness-constrained master problem is infeasible");

  Trained out;
  out.model.cnf = o.cnf;
  out.model.feature_map = bin.feature_map;
  out.model.rule_set = res.rule_set;
  out.model.config.objective = o.objective;
  out.model.config.fairness = o.fairness;
  out.model.config.eps1 = o.eps1;
  out.model.config.eps2 = o.eps2;
  out.model.config.complexity_bound = o.complexity;
  out.model.config.rule_depth = o.rule_depth;
  out.model.config.pricing = o.pricing;
  out.model.config.time_limit_s = o.time_limit;
  out.model.config.pricing_time_limit_s = o.pricing_time_limit;
  out.model.config.seed = o.seed;
  out.model.certificate.z_rmlp = res.z_rmlp_final;
  out.model.certificate.z_rmip = res.z_rmip;
  out.model.certificate.lower_bound = res.lower_bound;
  out.model.certificate.gap = res.optimality_gap;
  out.model.certificate.mlp_proved_optimal = res.mlp_proved_optimal;
  out.model.metrics = rf::evaluate_raw(out.model, raw);
  out.result = std::move(res);
  return out;
}

json metrics_to_json(const rf::ModelMetrics& m) {
  json j{{"accuracy", m.accuracy},
         {"errors", m.zero_one},
         {"hamming_loss", m.hamming},
         {"complexity", m.complexity}};
  if (m.has_fairness) {
    j["fnr"] = {m.fnr[0], m.fnr[1]};
    j["fpr"] = {m.fpr[0], m.fpr[1]};
    j["eqopp_gap"] = m.eqopp_gap;
    j["eqodds_gap"] = m.eqodds_gap;
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rf::DataError("cannot write: " + path);
  out << text;
}

int worker_count(int jobs) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("RULEFORGE_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, std::min(n, jobs));
}

// index-parallel map with deterministic result placement
template <typename F>
void parallel_for(int jobs, F&& body) {
  int workers = worker_count(jobs);
  if (workers <= 1) {
    for (int i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (true) {
        int i = next.fetch_add(1);
        if (i >= jobs) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

rf::RawDataset take_rows(const rf::RawDataset& raw, const std::vector<int>& rows) {
  rf::RawDataset out;
  out.target_name = raw.target_name;
  out.group_name = raw.group_name;
  out.num_rows = static_cast<int>(rows.size());
  for (const auto& col : raw.columns) {
    rf::RawColumn c;
    c.name = col.name;
    c.kind = col.kind;
    for (int r : rows) c.cells.push_back(col.cells[r]);
    out.columns.push_back(std::move(c));
  }
  for (int r : rows) {
    if (!raw.target.empty()) out.target.push_back(raw.target[r]);
    if (!raw.group.empty()) out.group.push_back(raw.group[r]);
  }
  return out;
}

// deterministic stratified fold assignment
std::vector<int> stratified_folds(const rf::RawDataset& raw, int k, std::uint64_t seed) {
  std::map<std::string, std::vector<int>> by_class;
  for (int i = 0; i < raw.num_rows; ++i) by_class[raw.target[i]].push_back(i);
  std::vector<int> fold(raw.num_rows, 0);
  std::mt19937_64 rng(seed);
  for (auto& [label, rows] : by_class) {
    if (static_cast<int>(rows.size()) < k) {
      std::ostringstream os;
      os << "class '" << label << "' has " << rows.size() << " members, fewer than "
         << k << " folds";
      throw rf::DataError(os.str());
    }
    for (std::size_t i = rows.size(); i > 1; --i) {
      std::uint64_t lim =
          std::numeric_limits<std::uint64_t>::max() -
          std::numeric_limits<std::uint64_t>::max() % i;
      std::uint64_t x;
      do {
        x = rng();
      } while (x >= lim);
      std::swap(rows[i - 1], rows[x % i]);
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
      fold[rows[i]] = static_cast<int>(i % k);
  }
  return fold;
}

// ---- subcommands ------------------------------------------------------------

int cmd_train(const TrainOptions& o, const std::string& out_path,
              const std::string& log_path) {
  validate(o);
  auto raw = rf::load_csv(o.data_path, csv_options(o));
  Trained t = train_on_raw(raw, o);
  if (!out_path.empty()) rf::save_model(out_path, t.model);
  if (!log_path.empty()) {
    std::ofstream log(log_path, std::ios::binary);
    if (!log) throw rf::DataError("cannot write: " + log_path);
    rf::write_iteration_log(log, t.result);
  }

  json summary{{"objective_value", t.result.z_rmip},
               {"rules", t.model.rule_set.rules.size()},
               {"complexity", t.model.rule_set.total_complexity()},
               {"train", metrics_to_json(t.model.metrics)},
               {"columns_generated", t.result.columns_generated},
               {"mlp_proved_optimal", t.result.mlp_proved_optimal},
               {"wall_seconds", t.result.wall_seconds}};
  if (t.result.lower_bound) summary["lower_bound"] = *t.result.lower_bound;
  if (t.result.optimality_gap) summary["optimality_gap"] = *t.result.optimality_gap;
  json rules = json::array();
  for (const auto& s : t.model.rule_strings()) rules.push_back(s);
  summary["rule_set"] = rules;
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                char delimiter, const std::string& out_path) {
  rf::Model model = rf::load_model(model_path);
  rf::CsvOptions c;
  c.delimiter = delimiter;
  c.target_column = model.feature_map.target_column;
  c.require_target = false;
  if (!model.feature_map.group_column.empty()) {
    // group tags are not needed to predict
    c.group_column = "";
  }
  auto raw = rf::load_csv(data_path, c);
  auto preds = rf::predict_raw(model, raw);
  std::ostringstream os;
  os << "prediction\n";
  for (int p : preds)
    os << (p > 0 ? model.feature_map.positive_value : model.feature_map.negative_value)
       << '\n';
  write_text(out_path, os.str());
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path,
                 char delimiter, const std::string& out_path) {
  rf::Model model = rf::load_model(model_path);
  rf::CsvOptions c;
  c.delimiter = delimiter;
  c.target_column = model.feature_map.target_column;
  c.require_target = false;  // value validation happens against the model
  c.group_column = model.feature_map.group_column;
  auto raw = rf::load_csv(data_path, c);
  if (raw.target.empty()) throw rf::DataError("data has no target column to evaluate");
  auto metrics = rf::evaluate_raw(model, raw);
  write_text(out_path, metrics_to_json(metrics).dump(2) + "\n");
  return 0;
}

int cmd_cv(const TrainOptions& o, int folds, const std::string& out_path) {
  validate(o);
  if (folds < 2) throw UsageError("--folds must be at least 2");
  auto raw = rf::load_csv(o.data_path, csv_options(o));
  auto fold_of = stratified_folds(raw, folds, o.seed);

  std::vector<rf::ModelMetrics> test_metrics(folds);
  std::vector<rf::ModelMetrics> train_metrics(folds);
  parallel_for(folds, [&](int f) {
    std::vector<int> train_rows, test_rows;
    for (int i = 0; i < raw.num_rows; ++i)
      (fold_of[i] == f ? test_rows : train_rows).push_back(i);
    auto train_raw = take_rows(raw, train_rows);
    auto test_raw = take_rows(raw, test_rows);
    Trained t = train_on_raw(train_raw, o);
    train_metrics[f] = t.model.metrics;
    test_metrics[f] = rf::evaluate_raw(t.model, test_raw);
  });

  auto mean_sd = [&](auto&& get) {
    double mean = 0;
    for (int f = 0; f < folds; ++f) mean += get(test_metrics[f]);
    mean /= folds;
    double var = 0;
    for (int f = 0; f < folds; ++f) {
      double d = get(test_metrics[f]) - mean;
      var += d * d;
    }
    return std::pair<double, double>(mean, std::sqrt(var / folds));
  };

  json out;
  out["folds"] = json::array();
  for (int f = 0; f < folds; ++f)
    out["folds"].push_back({{"fold", f},
                            {"train", metrics_to_json(train_metrics[f])},
                            {"test", metrics_to_json(test_metrics[f])}});
  auto [acc_mean, acc_sd] = mean_sd([](const rf::ModelMetrics& m) { return m.accuracy; });
  out["test_accuracy_mean"] = acc_mean;
  out["test_accuracy_sd"] = acc_sd;
  if (!o.group.empty()) {
    auto [eo_mean, eo_sd] =
        mean_sd([](const rf::ModelMetrics& m) { return m.eqopp_gap; });
    out["test_eqopp_gap_mean"] = eo_mean;
    out["test_eqopp_gap_sd"] = eo_sd;
    auto [eod_mean, eod_sd] =
        mean_sd([](const rf::ModelMetrics& m) { return m.eqodds_gap; });
    out["test_eqodds_gap_mean"] = eod_mean;
    out["test_eqodds_gap_sd"] = eod_sd;
  }
  write_text(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_sweep(const TrainOptions& base, const std::string& param,
              const std::vector<double>& values, const std::string& test_path,
              const std::string& out_path) {
  validate(base);
  if (values.empty()) throw UsageError("--values must list at least one value");
  if ((param == "eps1" || param == "eps2") && base.fairness == "none")
    throw UsageError("sweeping " + param + " requires a fairness mode");
  if (param != "complexity" && param != "eps1" && param != "eps2")
    throw UsageError("--param must be one of complexity, eps1, eps2");

  auto raw = rf::load_csv(base.data_path, csv_options(base));
  rf::RawDataset test_raw;
  bool have_test = !test_path.empty();
  if (have_test) {
    rf::CsvOptions c = csv_options(base);
    c.require_target = false;
    test_raw = rf::load_csv(test_path, c);
  }

  int n = static_cast<int>(values.size());
  struct Row {
    double param;
    int complexity;
    double train_acc, test_acc;
    double train_eqopp, train_eqodds, test_eqopp, test_eqodds;
    bool pareto = false;
  };
  std::vector<Row> rows(n);
  parallel_for(n, [&](int i) {
    TrainOptions o = base;
    if (param == "complexity")
      o.complexity = std::max(2, static_cast<int>(std::llround(values[i])));
    else if (param == "eps1")
      o.eps1 = values[i];
    else
      o.eps2 = values[i];
    Trained t = train_on_raw(raw, o);
    auto test = have_test ? rf::evaluate_raw(t.model, test_raw) : t.model.metrics;
    rows[i] = Row{values[i],
                  t.model.rule_set.total_complexity(),
                  t.model.metrics.accuracy,
                  test.accuracy,
                  t.model.metrics.eqopp_gap,
                  t.model.metrics.eqodds_gap,
                  test.eqopp_gap,
                  test.eqodds_gap,
                  false};
  });

  // Pareto flags over (complexity, test accuracy): dominated rows are unflagged
  for (int i = 0; i < n; ++i) {
    bool dominated = false;
    for (int j = 0; j < n && !dominated; ++j) {
      if (j == i) continue;
      bool no_worse = rows[j].test_acc >= rows[i].test_acc &&
                      rows[j].complexity <= rows[i].complexity;
      bool strictly = rows[j].test_acc > rows[i].test_acc ||
                      rows[j].complexity < rows[i].complexity;
      if (no_worse && strictly) dominated = true;
    }
    rows[i].pareto = !dominated;
  }

  std::ostringstream os;
  os << "param,complexity,train_accuracy,test_accuracy,train_eqopp_gap,"
        "train_eqodds_gap,test_eqopp_gap,test_eqodds_gap,pareto\n";
  for (const auto& r : rows)
    os << r.param << ',' << r.complexity << ',' << r.train_acc << ',' << r.test_acc
       << ',' << r.train_eqopp << ',' << r.train_eqodds << ',' << r.test_eqopp << ','
       << r.test_eqodds << ',' << (r.pareto ? 1 : 0) << '\n';
  write_text(out_path, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boolean rule-set (DNF/CNF) classifiers via column generation"};
  app.require_subcommand(1);

  TrainOptions opts;
  std::string out_path, model_path, data_path, test_path, param = "complexity";
  std::vector<double> values;
  int folds = 10;
  std::string delimiter = ",";

  auto add_train_flags = [&](CLI::App* cmd) {
    cmd->add_option("--data", opts.data_path, "training CSV")->required();
    cmd->add_option("--target", opts.target, "target column name")->required();
    cmd->add_option("--group", opts.group, "protected group column (two values)");
    cmd->add_option("--categorical", opts.categorical,
                    "columns to force categorical (repeatable)");
    cmd->add_option("--delimiter", delimiter, "CSV delimiter (default ,)");
    cmd->add_option("--complexity", opts.complexity, "rule set complexity bound C");
    cmd->add_option("--rule-depth", opts.rule_depth, "literals per rule bound D");
    cmd->add_option("--objective", opts.objective, "hamming | 01-agg | 01-disagg");
    cmd->add_option("--fairness", opts.fairness,
                    "none | eqopp | eqodds | eqodds-exact");
    cmd->add_option("--eps1", opts.eps1, "FNR gap tolerance");
    cmd->add_option("--eps2", opts.eps2, "FP-side gap tolerance");
    cmd->add_option("--time-limit", opts.time_limit, "total training seconds");
    cmd->add_option("--pricing-time-limit", opts.pricing_time_limit,
                    "per-round pricing seconds");
    cmd->add_option("--rmip-time-limit", opts.rmip_time_limit,
                    "restricted MIP seconds");
    cmd->add_option("--pricing", opts.pricing, "exact | heuristic | hybrid");
    cmd->add_option("--seed", opts.seed, "random seed");
    cmd->add_flag("--cnf", opts.cnf, "learn a CNF (AND-of-ORs) classifier");
    cmd->add_flag("--singletons", opts.singleton_start,
                  "warm start with all single-literal rules");
  };

  std::string log_path;
  CLI::App* train = app.add_subcommand("train", "fit a rule set and save the model");
  add_train_flags(train);
  train->add_option("--out", out_path, "model output path");
  train->add_option("--iteration-log", log_path,
                    "write the per-round JSON-lines training log here");

  CLI::App* predict = app.add_subcommand("predict", "predict labels for a CSV");
  predict->add_option("--model", model_path, "model JSON path")->required();
  predict->add_option("--data", data_path, "input CSV")->required();
  predict->add_option("--delimiter", delimiter, "CSV delimiter");
  predict->add_option("--out", out_path, "prediction CSV output (default stdout)");

  CLI::App* evaluate = app.add_subcommand("evaluate", "metrics of a model on a CSV");
  evaluate->add_option("--model", model_path, "model JSON path")->required();
  evaluate->add_option("--data", data_path, "input CSV with labels")->required();
  evaluate->add_option("--delimiter", delimiter, "CSV delimiter");
  evaluate->add_option("--out", out_path, "metrics JSON output (default stdout)");

  CLI::App* cv = app.add_subcommand("cv", "stratified cross-validation");
  add_train_flags(cv);
  cv->add_option("--folds", folds, "number of folds (default 10)");
  cv->add_option("--out", out_path, "report JSON output (default stdout)");

  CLI::App* sweep = app.add_subcommand("sweep", "accuracy/complexity/fairness frontier");
  add_train_flags(sweep);
  sweep->add_option("--param", param, "complexity | eps1 | eps2");
  sweep->add_option("--values", values, "parameter values to sweep")->required();
  sweep->add_option("--test-data", test_path, "held-out CSV for test metrics");
  sweep->add_option("--out", out_path, "frontier CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (!delimiter.empty()) opts.delimiter = delimiter[0];
    if (train->parsed()) return cmd_train(opts, out_path, log_path);
    if (predict->parsed())
      return cmd_predict(model_path, data_path, opts.delimiter, out_path);
    if (evaluate->parsed())
      return cmd_evaluate(model_path, data_path, opts.delimiter, out_path);
    if (cv->parsed()) return cmd_cv(opts, folds, out_path);
    if (sweep->parsed()) return cmd_sweep(opts, param, values, test_path, out_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const rf::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
