#include "ruleforge/binarizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ruleforge {

namespace {

std::vector<std::vector<std::string>> split_records(const std::string& content, char delim) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  auto end_field = [&]() {
    record.push_back(field);
    field.clear();
  };
  auto end_record = [&]() {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    any = false;
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      any = true;
    } else if (c == delim) {
      end_field();
      any = true;
    } else if (c == '\r') {
      // swallow; handled with the following \n or end of record
    } else if (c == '\n') {
      if (any || !field.empty() || !record.empty()) end_record();
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty() || !record.empty()) end_record();
  return records;
}

bool parse_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  if (std::isnan(v)) return false;
  *out = v;
  return true;
}

bool looks_numeric(const std::vector<std::string>& values) {
  bool saw_value = false;
  for (const auto& s : values) {
    if (s.empty()) continue;
    double v;
    if (!parse_number(s, &v)) return false;
    saw_value = true;
  }
  return saw_value;
}

// Larger value is the positive class: numerically when both parse, otherwise
// lexicographically.
std::pair<std::string, std::string> order_labels(const std::set<std::string>& values) {
  auto it = values.begin();
  std::string a = *it++;
  std::string b = *it;
  double na, nb;
  if (parse_number(a, &na) && parse_number(b, &nb)) {
    if (na > nb) std::swap(a, b);
  } else if (a > b) {
    std::swap(a, b);
  }
  return {b, a};  // (positive, negative)
}

// Interpolated sample quantile (the common "type 7" definition).
double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  std::size_t i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (h - i) * (sorted[i + 1] - sorted[i]);
}

}  // namespace

std::string LiteralDescriptor::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::NumLE: os << column << " <= " << threshold; break;
    case Kind::NumGT: os << column << " > " << threshold; break;
    case Kind::CatEQ: os << column << " == " << value; break;
    case Kind::CatNEQ: os << column << " != " << value; break;
    case Kind::IsNull: os << column << " is null"; break;
  }
  return os.str();
}

RawDataset parse_csv(const std::string& content, const CsvOptions& options) {
  auto records = split_records(content, options.delimiter);
  if (records.empty()) throw DataError("empty input: no header row");
  const auto& header = records.front();
  int ncols = static_cast<int>(header.size());

  int target_idx = -1, group_idx = -1;
  for (int c = 0; c < ncols; ++c) {
    if (header[c] == options.target_column) target_idx = c;
    if (!options.group_column.empty() && header[c] == options.group_column) group_idx = c;
  }
  if (options.require_target && target_idx < 0)
    throw DataError("missing target column '" + options.target_column + "'");
  if (!options.group_column.empty() && group_idx < 0)
    throw DataError("missing group column '" + options.group_column + "'");

  RawDataset raw;
  raw.num_rows = static_cast<int>(records.size()) - 1;
  raw.target_name = target_idx >= 0 ? options.target_column : "";
  raw.group_name = group_idx >= 0 ? options.group_column : "";

  std::vector<std::vector<std::string>> cells(ncols);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (static_cast<int>(rec.size()) != ncols) {
      std::ostringstream os;
      os << "row " << r << " has " << rec.size() << " fields, expected " << ncols;
      throw DataError(os.str());
    }
    for (int c = 0; c < ncols; ++c) cells[c].push_back(rec[c]);
  }

  for (int c = 0; c < ncols; ++c) {
    if (c == target_idx) {
      raw.target = cells[c];
      continue;
    }
    if (c == group_idx) {
      raw.group = cells[c];
      continue;
    }
    RawColumn col;
    col.name = header[c];
    auto it = options.kinds.find(col.name);
    if (it != options.kinds.end())
      col.kind = it->second;
    else
      col.kind = looks_numeric(cells[c]) ? ColumnKind::Numeric : ColumnKind::Categorical;
    col.cells.resize(raw.num_rows);
    for (int r = 0; r < raw.num_rows; ++r) {
      const std::string& s = cells[c][r];
      RawCell& cell = col.cells[r];
      if (s.empty()) continue;  // null
      if (col.kind == ColumnKind::Numeric) {
        if (!parse_number(s, &cell.num)) {
          std::ostringstream os;
          os << "unparseable numeric cell at row " << (r + 1) << ", column '" << col.name
             << "': '" << s << "'";
          throw DataError(os.str());
        }
      } else {
        cell.text = s;
      }
      cell.is_null = false;
    }
    raw.columns.push_back(std::move(col));
  }

  // The two-class requirement is a training-data constraint; evaluation data
  // only needs values the model already knows.
  if (target_idx >= 0 && options.require_target) {
    std::set<std::string> distinct;
    for (const auto& v : raw.target)
      if (!v.empty()) distinct.insert(v);
    if (distinct.size() != 2) {
      std::ostringstream os;
      os << "non-binary target: column '" << options.target_column << "' has "
         << distinct.size() << " distinct values";
      throw DataError(os.str());
    }
  }
  if (group_idx >= 0) {
    std::set<std::string> distinct;
    for (const auto& v : raw.group)
      if (!v.empty()) distinct.insert(v);
    if (distinct.size() != 2)
      throw DataError("group column must have exactly two distinct values");
  }
  return raw;
}

RawDataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

namespace {

bool evaluate_literal(const LiteralDescriptor& lit, const RawCell& cell) {
  if (lit.kind == LiteralDescriptor::Kind::IsNull) return cell.is_null;
  if (cell.is_null) return false;  // every comparison with null is false
  switch (lit.kind) {
    case LiteralDescriptor::Kind::NumLE: return cell.num <= lit.threshold;
    case LiteralDescriptor::Kind::NumGT: return cell.num > lit.threshold;
    case LiteralDescriptor::Kind::CatEQ: return cell.text == lit.value;
    case LiteralDescriptor::Kind::CatNEQ: return cell.text != lit.value;
    default: return false;
  }
}

void assign_labels_and_groups(const RawDataset& raw, const FeatureMap& fm, BinaryDataset* ds) {
  if (!raw.target.empty()) {
    for (int i = 0; i < raw.num_rows; ++i) {
      const std::string& t = raw.target[i];
      if (t == fm.positive_value)
        ds->set_label(i, 1);
      else if (t == fm.negative_value)
        ds->set_label(i, -1);
      else
        throw DataError("target value '" + t + "' not seen at training time");
    }
  }
  if (!fm.group_column.empty()) {
    if (raw.group.empty()) throw DataError("data has no group column '" + fm.group_column + "'");
    std::vector<std::int8_t> g(raw.num_rows);
    for (int i = 0; i < raw.num_rows; ++i) {
      if (raw.group[i] == fm.group1_value)
        g[i] = 1;
      else if (raw.group[i] == fm.group2_value)
        g[i] = 2;
      else
        throw DataError("group value '" + raw.group[i] + "' not seen at training time");
    }
    ds->set_groups(std::move(g));
  }
  ds->finalize();
}

}  // namespace

BinarizeResult binarize(const RawDataset& raw, const BinarizeConfig& config) {
  if (config.quantile_count < 2) throw std::invalid_argument("quantile_count must be >= 2");
  BinarizeResult out;
  FeatureMap& fm = out.feature_map;

  for (const auto& col : raw.columns) {
    bool has_null = false;
    for (const auto& cell : col.cells)
      if (cell.is_null) has_null = true;

    int first_literal = fm.num_features();
    if (col.kind == ColumnKind::Numeric) {
      std::vector<double> vals;
      for (const auto& cell : col.cells)
        if (!cell.is_null) vals.push_back(cell.num);
      std::sort(vals.begin(), vals.end());
      std::vector<double> thresholds;
      for (int k = 1; k < config.quantile_count; ++k) {
        double t = quantile(vals, static_cast<double>(k) / config.quantile_count);
        // a threshold at or above the column maximum makes LE constant-true
        // over the non-null cells; skip it
        if (!vals.empty() && t >= vals.back()) continue;
        thresholds.push_back(t);
      }
      thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
      if (thresholds.empty() && !has_null)
        out.warnings.push_back("column '" + col.name + "' has a single distinct value; no literals");
      for (double t : thresholds) {
        LiteralDescriptor le{LiteralDescriptor::Kind::NumLE, col.name, t, "", -1};
        if (config.include_negations) {
          int le_idx = fm.num_features();
          le.complement = le_idx + 1;
          fm.literals.push_back(le);
          fm.literals.push_back({LiteralDescriptor::Kind::NumGT, col.name, t, "", le_idx});
        } else {
          fm.literals.push_back(le);
        }
      }
    } else {
      std::set<std::string> values;
      for (const auto& cell : col.cells)
        if (!cell.is_null) values.insert(cell.text);
      if (values.size() <= 1 && !has_null) {
        out.warnings.push_back("column '" + col.name + "' has a single distinct value; no literals");
      } else {
        for (const auto& v : values) {
          LiteralDescriptor eq{LiteralDescriptor::Kind::CatEQ, col.name, 0.0, v, -1};
          if (config.include_negations) {
            int eq_idx = fm.num_features();
            eq.complement = eq_idx + 1;
            fm.literals.push_back(eq);
            fm.literals.push_back({LiteralDescriptor::Kind::CatNEQ, col.name, 0.0, v, eq_idx});
          } else {
            fm.literals.push_back(eq);
          }
        }
      }
    }
    if (has_null)
      fm.literals.push_back({LiteralDescriptor::Kind::IsNull, col.name, 0.0, "", -1});
    (void)first_literal;
  }

  fm.target_column = raw.target_name;
  if (!raw.target.empty()) {
    std::set<std::string> distinct(raw.target.begin(), raw.target.end());
    distinct.erase("");
    if (distinct.size() != 2) throw DataError("non-binary target");
    auto [pos, neg] = order_labels(distinct);
    fm.positive_value = pos;
    fm.negative_value = neg;
  }
  if (!raw.group.empty()) {
    std::set<std::string> distinct(raw.group.begin(), raw.group.end());
    distinct.erase("");
    if (distinct.size() != 2) throw DataError("group column must have exactly two distinct values");
    fm.group_column = raw.group_name;
    fm.group1_value = *distinct.begin();
    fm.group2_value = *std::next(distinct.begin());
  }

  out.dataset = apply_feature_map(raw, fm);
  return out;
}

BinaryDataset apply_feature_map(const RawDataset& raw, const FeatureMap& fm) {
  // column lookup, verifying coverage of every referenced column
  std::map<std::string, const RawColumn*> by_name;
  for (const auto& col : raw.columns) by_name[col.name] = &col;
  std::vector<const RawColumn*> source(fm.literals.size(), nullptr);
  for (std::size_t k = 0; k < fm.literals.size(); ++k) {
    auto it = by_name.find(fm.literals[k].column);
    if (it == by_name.end())
      throw DataError("data is missing column '" + fm.literals[k].column + "'");
    source[k] = it->second;
  }

  BinaryDataset ds(raw.num_rows, fm.num_features());
  for (std::size_t k = 0; k < fm.literals.size(); ++k) {
    const auto& lit = fm.literals[k];
    const auto& cells = source[k]->cells;
    for (int i = 0; i < raw.num_rows; ++i)
      if (evaluate_literal(lit, cells[i])) ds.set_bit(i, static_cast<int>(k));
  }
  assign_labels_and_groups(raw, fm, &ds);
  return ds;
}

}  // namespace ruleforge
