#include "ruleforge/rules.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ruleforge {

Rule::Rule(std::vector<int> lits) : literals(std::move(lits)) {
  std::sort(literals.begin(), literals.end());
  literals.erase(std::unique(literals.begin(), literals.end()), literals.end());
  if (!literals.empty() && literals.front() < 0)
    throw std::invalid_argument("negative literal index");
}

std::string Rule::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t k = 0; k < literals.size(); ++k) {
    if (k) os << ',';
    os << literals[k];
  }
  os << '}';
  return os.str();
}

void RuleSet::finalize() {
  std::sort(rules.begin(), rules.end());
  rules.erase(std::unique(rules.begin(), rules.end()), rules.end());
}

bool covers(const Rule& rule, const std::vector<std::uint8_t>& sample) {
  for (int j : rule.literals) {
    if (j >= static_cast<int>(sample.size()))
      throw std::out_of_range("literal index out of range for sample");
    if (!sample[j]) return false;
  }
  return true;
}

bool covers(const Rule& rule, const BinaryDataset& ds, int sample) {
  for (int j : rule.literals)
    if (!ds.bit(sample, j)) return false;
  return true;
}

Bitset coverage(const Rule& rule, const BinaryDataset& ds) {
  Bitset cov(ds.num_samples());
  cov.fill();
  for (int j : rule.literals) {
    if (j >= ds.num_features()) throw std::out_of_range("literal index out of range");
    cov &= ds.column(j);
  }
  return cov;
}

Bitset coverage(const RuleSet& rs, const BinaryDataset& ds) {
  Bitset any(ds.num_samples());
  for (const Rule& r : rs.rules) any |= coverage(r, ds);
  return any;
}

int predict(const RuleSet& rs, const std::vector<std::uint8_t>& sample) {
  for (const Rule& r : rs.rules)
    if (covers(r, sample)) return 1;
  return -1;
}

long long hamming_loss(const RuleSet& rs, const BinaryDataset& ds) {
  Bitset any = coverage(rs, ds);
  long long loss = ds.positive_mask().count() - ds.positive_mask().and_count(any);
  for (const Rule& r : rs.rules)
    loss += coverage(r, ds).and_count(ds.negative_mask());
  return loss;
}

long long zero_one_loss(const RuleSet& rs, const BinaryDataset& ds) {
  Bitset any = coverage(rs, ds);
  long long fn = ds.positive_mask().count() - ds.positive_mask().and_count(any);
  long long fp = ds.negative_mask().and_count(any);
  return fn + fp;
}

BinaryDataset to_cnf_problem(const BinaryDataset& ds) {
  BinaryDataset out(ds.num_samples(), ds.num_features());
  for (int j = 0; j < ds.num_features(); ++j)
    for (int i = 0; i < ds.num_samples(); ++i)
      out.set_bit(i, j, !ds.bit(i, j));
  std::vector<std::int8_t> groups;
  for (int i = 0; i < ds.num_samples(); ++i) {
    out.set_label(i, -ds.label(i));
    if (ds.has_groups()) groups.push_back(static_cast<std::int8_t>(ds.group(i)));
  }
  if (!groups.empty()) out.set_groups(std::move(groups));
  out.finalize();
  return out;
}

FairnessReport fairness_metrics(const RuleSet& rs, const BinaryDataset& ds) {
  if (!ds.has_groups()) throw std::invalid_argument("dataset has no group tags");
  FairnessReport rep;
  Bitset any = coverage(rs, ds);

  long long correct = 0;
  for (int i = 0; i < ds.num_samples(); ++i) {
    bool pos = any.test(i);
    if ((pos && ds.label(i) > 0) || (!pos && ds.label(i) < 0)) ++correct;
  }
  rep.accuracy = ds.num_samples() > 0
                     ? static_cast<double>(correct) / ds.num_samples()
                     : 0.0;

  for (int g = 1; g <= 2; ++g) {
    const auto& pg = ds.positives_of(g);
    const auto& ng = ds.negatives_of(g);
    if (pg.empty()) {
      rep.fnr_defined[g - 1] = false;
    } else {
      int fn = 0;
      for (int i : pg)
        if (!any.test(i)) ++fn;
      rep.fnr[g - 1] = static_cast<double>(fn) / pg.size();
    }
    if (ng.empty()) {
      rep.fpr_defined[g - 1] = false;
    } else {
      int fp = 0;
      long long ham_fp = 0;
      for (int i : ng)
        if (any.test(i)) ++fp;
      for (const Rule& r : rs.rules) {
        Bitset cov = coverage(r, ds);
        for (int i : ng)
          if (cov.test(i)) ++ham_fp;
      }
      rep.fpr[g - 1] = static_cast<double>(fp) / ng.size();
      rep.hamming_fp[g - 1] = static_cast<double>(ham_fp) / ng.size();
    }
  }
  rep.eqopp_gap = std::abs(rep.fnr[0] - rep.fnr[1]);
  rep.eqodds_gap =
      std::max(rep.eqopp_gap, std::abs(rep.fpr[0] - rep.fpr[1]));
  return rep;
}

}  // namespace ruleforge
