#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ruleforge/dataset.hpp"

namespace ruleforge {

// A conjunction of binarized-feature literals, kept as a sorted unique index
// set so that structural equality is equality of literal sets.
struct Rule {
  std::vector<int> literals;

  Rule() = default;
  explicit Rule(std::vector<int> lits);

  // one plus the number of conditions
  int complexity() const { return 1 + static_cast<int>(literals.size()); }
  bool empty() const { return literals.empty(); }

  bool operator==(const Rule& o) const { return literals == o.literals; }
  bool operator<(const Rule& o) const { return literals < o.literals; }

  std::string to_string() const;
};

struct RuleSetMetadata {
  double objective = 0.0;
  double lower_bound = 0.0;
  bool has_lower_bound = false;
  double gap = 0.0;
};

struct RuleSet {
  std::vector<Rule> rules;
  RuleSetMetadata meta;

  int total_complexity() const {
    int c = 0;
    for (const Rule& r : rules) c += r.complexity();
    return c;
  }
  // Removes duplicate rules, keeping first occurrence order-independent
  // (canonical sort).
  void finalize();
};

bool covers(const Rule& rule, const std::vector<std::uint8_t>& sample);
bool covers(const Rule& rule, const BinaryDataset& ds, int sample);

// Bit i set iff sample i satisfies every literal of the rule.
Bitset coverage(const Rule& rule, const BinaryDataset& ds);

// Union of per-rule coverage; the DNF positive region.
Bitset coverage(const RuleSet& rs, const BinaryDataset& ds);

int predict(const RuleSet& rs, const std::vector<std::uint8_t>& sample);

// False negatives plus, for each negative sample, the number of selected rules
// covering it.
long long hamming_loss(const RuleSet& rs, const BinaryDataset& ds);

long long zero_one_loss(const RuleSet& rs, const BinaryDataset& ds);

// Negates labels and flips feature bits; a DNF rule set learned on the result,
// negated, is a CNF classifier for the input.
BinaryDataset to_cnf_problem(const BinaryDataset& ds);

struct FairnessReport {
  double fnr[2] = {0.0, 0.0};
  double fpr[2] = {0.0, 0.0};
  // false when the corresponding group has no positives/negatives; the rate is
  // then reported as 0 by convention
  bool fnr_defined[2] = {true, true};
  bool fpr_defined[2] = {true, true};
  double eqopp_gap = 0.0;
  double eqodds_gap = 0.0;
  double accuracy = 0.0;
  // normalized Hamming false-positive terms, one per group (the equalized-odds
  // proxy quantity)
  double hamming_fp[2] = {0.0, 0.0};
};

FairnessReport fairness_metrics(const RuleSet& rs, const BinaryDataset& ds);

}  // namespace ruleforge
