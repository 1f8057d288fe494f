#include <cstdio>

#include "doctest.h"
#include "ruleforge/colgen.hpp"
#include "ruleforge/model_io.hpp"

using namespace ruleforge;

namespace {

RawDataset toy_raw() {
  CsvOptions o;
  o.target_column = "label";
  std::string csv = "f1,f2,label\n1,0,1\n1,0,1\n0,1,1\n0,0,0\n";
  CsvOptions kinds = o;
  kinds.kinds["f1"] = ColumnKind::Numeric;
  kinds.kinds["f2"] = ColumnKind::Numeric;
  return parse_csv(csv, kinds);
}

Model train_toy(bool cnf = false) {
  auto raw = toy_raw();
  auto bin = binarize(raw);
  BinaryDataset ds = cnf ? to_cnf_problem(bin.dataset) : bin.dataset;
  FitConfig cfg;
  cfg.master.complexity_bound = 8;
  cfg.max_rule_literals = 2;
  cfg.pricing = PricingMode::Exact;
  cfg.total_time_limit_s = 30;
  cfg.pricing_time_limit_s = 10;
  auto res = fit(ds, cfg);
  Model m;
  m.cnf = cnf;
  m.feature_map = bin.feature_map;
  m.rule_set = res.rule_set;
  m.config.complexity_bound = 8;
  m.config.rule_depth = 2;
  m.certificate.z_rmlp = res.z_rmlp_final;
  m.certificate.z_rmip = res.z_rmip;
  m.certificate.lower_bound = res.lower_bound;
  m.certificate.gap = res.optimality_gap;
  m.certificate.mlp_proved_optimal = res.mlp_proved_optimal;
  m.metrics = evaluate_raw(m, raw);
  return m;
}

}  // namespace

TEST_CASE("model json round trip") {
  Model m = train_toy();
  std::string text = model_to_json(m);
  Model back = model_from_json(text);
  CHECK(back.cnf == m.cnf);
  CHECK(back.rule_set.rules == m.rule_set.rules);
  CHECK(back.feature_map.literals.size() == m.feature_map.literals.size());
  CHECK(back.metrics.accuracy == doctest::Approx(m.metrics.accuracy));
  CHECK(back.certificate.z_rmip == doctest::Approx(m.certificate.z_rmip));
  REQUIRE(back.certificate.lower_bound.has_value());
  CHECK(*back.certificate.lower_bound == *m.certificate.lower_bound);
}

TEST_CASE("save/load through a file") {
  Model m = train_toy();
  std::string path = "/tmp/rf_model_test.json";
  save_model(path, m);
  Model back = load_model(path);
  CHECK(back.rule_set.rules == m.rule_set.rules);
  std::remove(path.c_str());
}

TEST_CASE("trained model predicts its training data perfectly") {
  Model m = train_toy();
  auto raw = toy_raw();
  CHECK(m.metrics.accuracy == doctest::Approx(1.0));
  auto preds = predict_raw(m, raw);
  REQUIRE(preds.size() == 4);
  CHECK(preds[0] == 1);
  CHECK(preds[1] == 1);
  CHECK(preds[2] == 1);
  CHECK(preds[3] == -1);
  // evaluate twice: identical metrics (round-trip invariant)
  auto m2 = evaluate_raw(m, raw);
  CHECK(m2.accuracy == doctest::Approx(m.metrics.accuracy));
  CHECK(m2.zero_one == m.metrics.zero_one);
}

TEST_CASE("cnf model predictions respect the De Morgan transform") {
  Model dnf = train_toy(false);
  Model cnf = train_toy(true);
  auto raw = toy_raw();
  auto pd = predict_raw(dnf, raw);
  auto pc = predict_raw(cnf, raw);
  // both models separate this trivially separable data perfectly
  for (int i = 0; i < 4; ++i) CHECK(pd[i] == pc[i]);
  CHECK(cnf.metrics.accuracy == doctest::Approx(1.0));
}

TEST_CASE("rule strings render through the feature map") {
  Model m = train_toy();
  auto strings = m.rule_strings();
  REQUIRE(strings.size() == m.rule_set.rules.size());
  for (const auto& s : strings) CHECK_FALSE(s.empty());
}

TEST_CASE("evaluate requires labels") {
  Model m = train_toy();
  CsvOptions o;
  o.target_column = "label";
  o.require_target = false;
  auto raw = parse_csv("f1,f2\n1,0\n", o);
  CHECK_THROWS_AS(evaluate_raw(m, raw), DataError);
  // predictions still work without labels
  auto preds = predict_raw(m, raw);
  CHECK(preds.size() == 1);
}

TEST_CASE("malformed model json raises DataError") {
  CHECK_THROWS_AS(model_from_json("{not json"), DataError);
}
