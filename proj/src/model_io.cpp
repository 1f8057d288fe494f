#include "ruleforge/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ruleforge {

using nlohmann::json;

namespace {

const char* kind_name(LiteralDescriptor::Kind k) {
  switch (k) {
    case LiteralDescriptor::Kind::NumLE: return "num_le";
    case LiteralDescriptor::Kind::NumGT: return "num_gt";
    case LiteralDescriptor::Kind::CatEQ: return "cat_eq";
    case LiteralDescriptor::Kind::CatNEQ: return "cat_neq";
    case LiteralDescriptor::Kind::IsNull: return "is_null";
  }
  return "num_le";
}

LiteralDescriptor::Kind kind_from(const std::string& s) {
  if (s == "num_le") return LiteralDescriptor::Kind::NumLE;
  if (s == "num_gt") return LiteralDescriptor::Kind::NumGT;
  if (s == "cat_eq") return LiteralDescriptor::Kind::CatEQ;
  if (s == "cat_neq") return LiteralDescriptor::Kind::CatNEQ;
  if (s == "is_null") return LiteralDescriptor::Kind::IsNull;
  throw DataError("unknown literal kind in model: " + s);
}

json feature_map_to_json(const FeatureMap& fm) {
  json lits = json::array();
  for (const auto& l : fm.literals) {
    json j{{"kind", kind_name(l.kind)}, {"column", l.column}, {"complement", l.complement}};
    if (l.kind == LiteralDescriptor::Kind::NumLE || l.kind == LiteralDescriptor::Kind::NumGT)
      j["threshold"] = l.threshold;
    if (l.kind == LiteralDescriptor::Kind::CatEQ || l.kind == LiteralDescriptor::Kind::CatNEQ)
      j["value"] = l.value;
    lits.push_back(std::move(j));
  }
  json out{{"literals", std::move(lits)},
           {"target_column", fm.target_column},
           {"positive_value", fm.positive_value},
           {"negative_value", fm.negative_value}};
  if (!fm.group_column.empty()) {
    out["group_column"] = fm.group_column;
    out["group1_value"] = fm.group1_value;
    out["group2_value"] = fm.group2_value;
  }
  return out;
}

FeatureMap feature_map_from_json(const json& j) {
  FeatureMap fm;
  for (const auto& l : j.at("literals")) {
    LiteralDescriptor d;
    d.kind = kind_from(l.at("kind").get<std::string>());
    d.column = l.at("column").get<std::string>();
    d.complement = l.value("complement", -1);
    d.threshold = l.value("threshold", 0.0);
    d.value = l.value("value", std::string{});
    fm.literals.push_back(std::move(d));
  }
  fm.target_column = j.value("target_column", std::string{});
  fm.positive_value = j.value("positive_value", std::string{});
  fm.negative_value = j.value("negative_value", std::string{});
  fm.group_column = j.value("group_column", std::string{});
  fm.group1_value = j.value("group1_value", std::string{});
  fm.group2_value = j.value("group2_value", std::string{});
  return fm;
}

}  // namespace

std::vector<std::string> Model::rule_strings() const {
  std::vector<std::string> out;
  for (const Rule& r : rule_set.rules) {
    std::string s;
    if (r.empty()) s = "(always)";
    for (std::size_t t = 0; t < r.literals.size(); ++t) {
      if (t) s += " AND ";
      s += feature_map.literals[r.literals[t]].to_string();
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string model_to_json(const Model& model) {
  json rules = json::array();
  for (const Rule& r : model.rule_set.rules) rules.push_back(r.literals);
  json j{{"version", model.version},
         {"form", model.cnf ? "cnf" : "dnf"},
         {"feature_map", feature_map_to_json(model.feature_map)},
         {"rules", std::move(rules)},
         {"rules_text", model.rule_strings()},
         {"config",
          {{"objective", model.config.objective},
           {"fairness", model.config.fairness},
           {"eps1", model.config.eps1},
           {"eps2", model.config.eps2},
           {"complexity_bound", model.config.complexity_bound},
           {"rule_depth", model.config.rule_depth},
           {"pricing", model.config.pricing},
           {"time_limit_s", model.config.time_limit_s},
           {"pricing_time_limit_s", model.config.pricing_time_limit_s},
           {"seed", model.config.seed}}},
         {"metrics",
          {{"accuracy", model.metrics.accuracy},
           {"zero_one_loss", model.metrics.zero_one},
           {"hamming_loss", model.metrics.hamming},
           {"complexity", model.metrics.complexity}}},
         {"certificate",
          {{"z_rmlp", model.certificate.z_rmlp},
           {"z_rmip", model.certificate.z_rmip},
           {"mlp_proved_optimal", model.certificate.mlp_proved_optimal}}}};
  if (model.metrics.has_fairness) {
    j["metrics"]["fnr"] = {model.metrics.fnr[0], model.metrics.fnr[1]};
    j["metrics"]["fpr"] = {model.metrics.fpr[0], model.metrics.fpr[1]};
    j["metrics"]["eqopp_gap"] = model.metrics.eqopp_gap;
    j["metrics"]["eqodds_gap"] = model.metrics.eqodds_gap;
  }
  if (model.certificate.lower_bound) j["certificate"]["lower_bound"] = *model.certificate.lower_bound;
  if (model.certificate.gap) j["certificate"]["optimality_gap"] = *model.certificate.gap;
  return j.dump(2);
}

Model model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  Model m;
  m.version = j.value("version", 1);
  m.cnf = j.value("form", "dnf") == std::string("cnf");
  m.feature_map = feature_map_from_json(j.at("feature_map"));
  for (const auto& r : j.at("rules"))
    m.rule_set.rules.emplace_back(r.get<std::vector<int>>());
  const auto& cfgj = j.at("config");
  m.config.objective = cfgj.value("objective", "hamming");
  m.config.fairness = cfgj.value("fairness", "none");
  m.config.eps1 = cfgj.value("eps1", 0.0);
  m.config.eps2 = cfgj.value("eps2", 0.0);
  m.config.complexity_bound = cfgj.value("complexity_bound", 0);
  m.config.rule_depth = cfgj.value("rule_depth", 0);
  m.config.pricing = cfgj.value("pricing", "hybrid");
  m.config.time_limit_s = cfgj.value("time_limit_s", 0.0);
  m.config.pricing_time_limit_s = cfgj.value("pricing_time_limit_s", 0.0);
  m.config.seed = cfgj.value("seed", 0ULL);
  const auto& met = j.at("metrics");
  m.metrics.accuracy = met.value("accuracy", 0.0);
  m.metrics.zero_one = met.value("zero_one_loss", 0LL);
  m.metrics.hamming = met.value("hamming_loss", 0LL);
  m.metrics.complexity = met.value("complexity", 0);
  if (met.contains("eqopp_gap")) {
    m.metrics.has_fairness = true;
    m.metrics.eqopp_gap = met["eqopp_gap"].get<double>();
    m.metrics.eqodds_gap = met.value("eqodds_gap", 0.0);
    if (met.contains("fnr")) {
      m.metrics.fnr[0] = met["fnr"][0].get<double>();
      m.metrics.fnr[1] = met["fnr"][1].get<double>();
    }
    if (met.contains("fpr")) {
      m.metrics.fpr[0] = met["fpr"][0].get<double>();
      m.metrics.fpr[1] = met["fpr"][1].get<double>();
    }
  }
  const auto& cert = j.at("certificate");
  m.certificate.z_rmlp = cert.value("z_rmlp", 0.0);
  m.certificate.z_rmip = cert.value("z_rmip", 0.0);
  m.certificate.mlp_proved_optimal = cert.value("mlp_proved_optimal", false);
  if (cert.contains("lower_bound")) m.certificate.lower_bound = cert["lower_bound"].get<int>();
  if (cert.contains("optimality_gap")) m.certificate.gap = cert["optimality_gap"].get<double>();
  return m;
}

void save_model(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  out << model_to_json(model) << '\n';
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

std::vector<int> predict_raw(const Model& model, const RawDataset& raw) {
  FeatureMap fm = model.feature_map;
  if (raw.target.empty()) fm.target_column.clear();
  BinaryDataset ds = apply_feature_map(raw, fm);
  BinaryDataset eval = model.cnf ? to_cnf_problem(ds) : std::move(ds);
  Bitset cov = coverage(model.rule_set, eval);
  std::vector<int> out(eval.num_samples());
  for (int i = 0; i < eval.num_samples(); ++i) {
    bool hit = cov.test(i);
    // the CNF classifier is the negated DNF on the flipped features
    out[i] = model.cnf ? (hit ? -1 : 1) : (hit ? 1 : -1);
  }
  return out;
}

ModelMetrics evaluate_raw(const Model& model, const RawDataset& raw) {
  if (raw.target.empty()) throw DataError("evaluation data has no target column");
  BinaryDataset ds = apply_feature_map(raw, model.feature_map);
  std::vector<int> preds = predict_raw(model, raw);

  ModelMetrics m;
  m.complexity = model.rule_set.total_complexity();
  long long correct = 0;
  for (int i = 0; i < ds.num_samples(); ++i) {
    if (preds[i] == ds.label(i))
      ++correct;
    else
      ++m.zero_one;
  }
  m.accuracy = ds.num_samples() ? static_cast<double>(correct) / ds.num_samples() : 0.0;

  // group rates come from the predictions against the original labels
  if (ds.has_groups()) {
    m.has_fairness = true;
    for (int g = 1; g <= 2; ++g) {
      const auto& pg = ds.positives_of(g);
      const auto& ng = ds.negatives_of(g);
      int fn = 0, fp = 0;
      for (int i : pg)
        if (preds[i] < 0) ++fn;
      for (int i : ng)
        if (preds[i] > 0) ++fp;
      m.fnr[g - 1] = pg.empty() ? 0.0 : static_cast<double>(fn) / pg.size();
      m.fpr[g - 1] = ng.empty() ? 0.0 : static_cast<double>(fp) / ng.size();
    }
    m.eqopp_gap = std::abs(m.fnr[0] - m.fnr[1]);
    m.eqodds_gap = std::max(m.eqopp_gap, std::abs(m.fpr[0] - m.fpr[1]));
  }

  // Hamming loss is defined on the learning problem, i.e. after the CNF
  // transform when the model is CNF.
  BinaryDataset eval = model.cnf ? to_cnf_problem(ds) : std::move(ds);
  m.hamming = hamming_loss(model.rule_set, eval);
  return m;
}

}  // namespace ruleforge
