#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <vector>

namespace ruleforge {

// Fixed-size bitset over sample indices. Rule coverage is an AND-reduction of
// feature columns, so the hot operations (and, and_count) work a word at a
// time and avoid allocation where possible.
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(int size, bool value = false)
      : size_(size), words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0) {
    trim();
  }

  int size() const { return size_; }

  bool test(int i) const {
    assert(i >= 0 && i < size_);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(int i, bool v = true) {
    assert(i >= 0 && i < size_);
    std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }

  void reset() { std::fill(words_.begin(), words_.end(), 0); }

  void fill() {
    std::fill(words_.begin(), words_.end(), ~std::uint64_t{0});
    trim();
  }

  int count() const {
    int c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  bool any() const {
    for (std::uint64_t w : words_)
      if (w) return true;
    return false;
  }

  Bitset& operator&=(const Bitset& o) {
    assert(size_ == o.size_);
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= o.words_[k];
    return *this;
  }

  Bitset& operator|=(const Bitset& o) {
    assert(size_ == o.size_);
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= o.words_[k];
    return *this;
  }

  // popcount(*this & o) without materializing the intersection.
  int and_count(const Bitset& o) const {
    assert(size_ == o.size_);
    int c = 0;
    for (std::size_t k = 0; k < words_.size(); ++k)
      c += std::popcount(words_[k] & o.words_[k]);
    return c;
  }

  void flip() {
    for (std::uint64_t& w : words_) w = ~w;
    trim();
  }

  bool operator==(const Bitset& o) const {
    return size_ == o.size_ && words_ == o.words_;
  }

  template <typename F>
  void for_each_set(F&& f) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      std::uint64_t w = words_[k];
      while (w) {
        int b = std::countr_zero(w);
        f(static_cast<int>(k * 64 + b));
        w &= w - 1;
      }
    }
  }

  std::vector<int> to_indices() const {
    std::vector<int> out;
    out.reserve(count());
    for_each_set([&](int i) { out.push_back(i); });
    return out;
  }

 private:
  void trim() {
    if (size_ % 64 != 0 && !words_.empty())
      words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  int size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace ruleforge
