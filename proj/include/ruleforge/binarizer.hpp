#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ruleforge/dataset.hpp"

namespace ruleforge {

// Raised for malformed input data (bad CSV cells, schema mismatches). The CLI
// maps this to its data-error exit code.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ColumnKind { Numeric, Categorical };

struct RawCell {
  bool is_null = true;
  double num = 0.0;      // numeric columns
  std::string text;      // categorical columns
};

struct RawColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<RawCell> cells;
};

// Pre-binarization table: feature columns plus raw target/group strings.
struct RawDataset {
  std::vector<RawColumn> columns;
  std::string target_name;
  std::vector<std::string> target;  // empty when the file has no target column
  std::string group_name;           // empty when unused
  std::vector<std::string> group;
  int num_rows = 0;

  const RawColumn* find_column(const std::string& name) const {
    for (const auto& c : columns)
      if (c.name == name) return &c;
    return nullptr;
  }
};

struct CsvOptions {
  char delimiter = ',';
  std::string target_column;
  std::string group_column;                      // optional
  std::map<std::string, ColumnKind> kinds;       // explicit kinds; others inferred
  bool require_target = true;
};

// RFC-4180-style reader with a header row. Empty cells become nulls; rows are
// never dropped. Numeric cells that fail to parse raise DataError with their
// row/column position.
RawDataset load_csv(const std::string& path, const CsvOptions& options);
RawDataset parse_csv(const std::string& content, const CsvOptions& options);

struct LiteralDescriptor {
  enum class Kind { NumLE, NumGT, CatEQ, CatNEQ, IsNull };
  Kind kind = Kind::NumLE;
  std::string column;
  double threshold = 0.0;  // NumLE / NumGT
  std::string value;       // CatEQ / CatNEQ
  int complement = -1;     // paired negation literal, -1 for IsNull

  std::string to_string() const;
};

// Ordered literal descriptors plus the label/group bindings needed to map raw
// rows into the binarized space. Serializes with the model so a trained rule
// set is portable.
struct FeatureMap {
  std::vector<LiteralDescriptor> literals;
  std::string target_column;
  std::string positive_value, negative_value;
  std::string group_column;
  std::string group1_value, group2_value;

  int num_features() const { return static_cast<int>(literals.size()); }
};

struct BinarizeConfig {
  int quantile_count = 10;
  bool include_negations = true;
};

struct BinarizeResult {
  BinaryDataset dataset;
  FeatureMap feature_map;
  std::vector<std::string> warnings;
};

// Numeric columns produce LE/GT literal pairs at the distinct interior sample
// quantiles; categorical columns produce EQ/NEQ pairs per observed value;
// columns containing nulls additionally produce one IsNull literal. Every
// comparison against a null cell evaluates to 0.
BinarizeResult binarize(const RawDataset& raw, const BinarizeConfig& config = {});

// Deterministic transform of raw data through an existing feature map. Unseen
// categorical values make all EQ literals 0 and all NEQ literals 1. When the
// raw data has no target column the labels default to -1.
BinaryDataset apply_feature_map(const RawDataset& raw, const FeatureMap& fm);

}  // namespace ruleforge
