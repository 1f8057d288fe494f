#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ruleforge/binarizer.hpp"
#include "ruleforge/colgen.hpp"
#include "ruleforge/rules.hpp"

namespace ruleforge {

struct ModelMetrics {
  double accuracy = 0.0;
  long long zero_one = 0;
  long long hamming = 0;
  int complexity = 0;
  bool has_fairness = false;
  double fnr[2] = {0, 0}, fpr[2] = {0, 0};
  double eqopp_gap = 0.0, eqodds_gap = 0.0;
};

struct ModelCertificate {
  double z_rmlp = 0.0;
  double z_rmip = 0.0;
  std::optional<int> lower_bound;
  std::optional<double> gap;
  bool mlp_proved_optimal = false;
};

struct TrainSummary {
  std::string objective = "hamming";
  std::string fairness = "none";
  double eps1 = 0.0, eps2 = 0.0;
  int complexity_bound = 0;
  int rule_depth = 0;
  std::string pricing = "hybrid";
  double time_limit_s = 0.0, pricing_time_limit_s = 0.0;
  std::uint64_t seed = 0;
};

// Self-contained trained model: prediction needs only this plus raw data.
struct Model {
  int version = 1;
  bool cnf = false;
  FeatureMap feature_map;
  RuleSet rule_set;
  TrainSummary config;
  ModelMetrics metrics;
  ModelCertificate certificate;

  std::vector<std::string> rule_strings() const;
};

std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

// Predictions on raw rows (labels not required); handles the CNF transform.
std::vector<int> predict_raw(const Model& model, const RawDataset& raw);

// Metrics against the raw data's labels (which must be present).
ModelMetrics evaluate_raw(const Model& model, const RawDataset& raw);

}  // namespace ruleforge
