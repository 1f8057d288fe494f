#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ruleforge/bitset.hpp"

namespace ruleforge {

// Binarized sample matrix with labels in {-1,+1} and optional two-group tags.
// Features are stored column-wise as bitsets so that rule coverage reduces to
// word-parallel ANDs.
class BinaryDataset {
 public:
  BinaryDataset() = default;
  BinaryDataset(int num_samples, int num_features)
      : n_(num_samples),
        d_(num_features),
        columns_(num_features, Bitset(num_samples)),
        labels_(num_samples, -1),
        groups_() {}

  int num_samples() const { return n_; }
  int num_features() const { return d_; }

  bool bit(int sample, int feature) const { return columns_[feature].test(sample); }
  void set_bit(int sample, int feature, bool v = true) { columns_[feature].set(sample, v); }

  const Bitset& column(int feature) const { return columns_[feature]; }

  int label(int sample) const { return labels_[sample]; }
  void set_label(int sample, int y) {
    if (y != 1 && y != -1) throw std::invalid_argument("label must be +1 or -1");
    labels_[sample] = static_cast<std::int8_t>(y);
  }

  bool has_groups() const { return !groups_.empty(); }
  int group(int sample) const { return groups_.empty() ? 0 : groups_[sample]; }
  void set_groups(std::vector<std::int8_t> groups) {
    if (static_cast<int>(groups.size()) != n_)
      throw std::invalid_argument("group vector size mismatch");
    for (std::int8_t g : groups)
      if (g != 1 && g != 2) throw std::invalid_argument("group ids must be 1 or 2");
    groups_ = std::move(groups);
  }

  // Derived index sets. finalize() must be called after labels/groups change.
  void finalize() {
    pos_idx_.clear();
    neg_idx_.clear();
    pos_mask_ = Bitset(n_);
    neg_mask_ = Bitset(n_);
    for (int g = 0; g < 2; ++g) {
      pos_g_[g].clear();
      neg_g_[g].clear();
    }
    for (int i = 0; i < n_; ++i) {
      if (labels_[i] > 0) {
        pos_idx_.push_back(i);
        pos_mask_.set(i);
        if (has_groups()) pos_g_[groups_[i] - 1].push_back(i);
      } else {
        neg_idx_.push_back(i);
        neg_mask_.set(i);
        if (has_groups()) neg_g_[groups_[i] - 1].push_back(i);
      }
    }
  }

  const std::vector<int>& positives() const { return pos_idx_; }
  const std::vector<int>& negatives() const { return neg_idx_; }
  const Bitset& positive_mask() const { return pos_mask_; }
  const Bitset& negative_mask() const { return neg_mask_; }
  // g is 1 or 2.
  const std::vector<int>& positives_of(int g) const {
    if (g < 1 || g > 2) throw std::out_of_range("group id must be 1 or 2");
    return pos_g_[g - 1];
  }
  const std::vector<int>& negatives_of(int g) const {
    if (g < 1 || g > 2) throw std::out_of_range("group id must be 1 or 2");
    return neg_g_[g - 1];
  }

  // Zero-valued feature indices of one sample (the pricing constraints index
  // over these).
  std::vector<int> zero_features(int sample) const {
    std::vector<int> out;
    for (int j = 0; j < d_; ++j)
      if (!columns_[j].test(sample)) out.push_back(j);
    return out;
  }

 private:
  int n_ = 0;
  int d_ = 0;
  std::vector<Bitset> columns_;
  std::vector<std::int8_t> labels_;
  std::vector<std::int8_t> groups_;  // empty when absent; otherwise 1 or 2
  std::vector<int> pos_idx_, neg_idx_;
  Bitset pos_mask_, neg_mask_;
  std::vector<int> pos_g_[2], neg_g_[2];
};

}  // namespace ruleforge
