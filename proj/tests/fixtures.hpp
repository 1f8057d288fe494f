#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ruleforge/dataset.hpp"
#include "ruleforge/rules.hpp"

namespace rftest {

using ruleforge::BinaryDataset;
using ruleforge::Rule;

// Four data points, two binary features: X1=X2=(1,0) labeled +1, X3=(0,1)
// labeled +1, X4=(0,0) labeled -1.
inline BinaryDataset make_toy4(bool with_groups = false) {
  BinaryDataset ds(4, 2);
  ds.set_bit(0, 0);
  ds.set_bit(1, 0);
  ds.set_bit(2, 1);
  ds.set_label(0, 1);
  ds.set_label(1, 1);
  ds.set_label(2, 1);
  ds.set_label(3, -1);
  if (with_groups) ds.set_groups({1, 1, 2, 1});
  ds.finalize();
  return ds;
}

// d=6 instance where Hamming loss and 0-1 loss pull apart: positives have
// exactly three ones among the first four features (zeros elsewhere), the two
// negatives have ones everywhere except one of the last two features. The
// candidate rules are the four 3-of-the-first-4 conjunctions.
struct Theorem1Instance {
  BinaryDataset ds;
  std::vector<Rule> candidate_rules;
};

inline Theorem1Instance make_theorem1() {
  std::vector<std::array<int, 6>> rows;
  for (int skip = 0; skip < 4; ++skip) {
    std::array<int, 6> r{1, 1, 1, 1, 0, 0};
    r[skip] = 0;
    rows.push_back(r);
  }
  rows.push_back({1, 1, 1, 1, 1, 0});
  rows.push_back({1, 1, 1, 1, 0, 1});

  Theorem1Instance out{BinaryDataset(6, 6), {}};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) out.ds.set_bit(i, j, rows[i][j] != 0);
    out.ds.set_label(i, i < 4 ? 1 : -1);
  }
  out.ds.finalize();
  for (int skip = 0; skip < 4; ++skip) {
    std::vector<int> lits;
    for (int j = 0; j < 4; ++j)
      if (j != skip) lits.push_back(j);
    out.candidate_rules.emplace_back(lits);
  }
  return out;
}

// d=6 all-negative instance where the Hamming equalized-odds proxy is exactly
// balanced while the true FPR gap is 1 - 1/|G2|. Group 1: the ten points with
// a zero last component and exactly three ones among the first five features.
// Group 2: one all-ones point plus nine all-zeros points.
struct Theorem3Instance {
  BinaryDataset ds;
  std::vector<Rule> candidate_rules;
  int group2_size = 0;
};

inline Theorem3Instance make_theorem3() {
  std::vector<std::array<int, 6>> rows;
  std::vector<int> groups;
  for (int a = 0; a < 5; ++a)
    for (int b = a + 1; b < 5; ++b)
      for (int c = b + 1; c < 5; ++c) {
        std::array<int, 6> r{0, 0, 0, 0, 0, 0};
        r[a] = r[b] = r[c] = 1;
        rows.push_back(r);
        groups.push_back(1);
      }
  int g1 = static_cast<int>(rows.size());  // 10
  rows.push_back({1, 1, 1, 1, 1, 1});
  groups.push_back(2);
  for (int k = 0; k < g1 - 1; ++k) {
    rows.push_back({0, 0, 0, 0, 0, 0});
    groups.push_back(2);
  }

  Theorem3Instance out{BinaryDataset(static_cast<int>(rows.size()), 6), {}, g1};
  std::vector<std::int8_t> g8(groups.begin(), groups.end());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < 6; ++j) out.ds.set_bit(static_cast<int>(i), j, rows[i][j] != 0);
    out.ds.set_label(static_cast<int>(i), -1);
  }
  out.ds.set_groups(g8);
  out.ds.finalize();
  for (int a = 0; a < 5; ++a)
    for (int b = a + 1; b < 5; ++b)
      for (int c = b + 1; c < 5; ++c) out.candidate_rules.emplace_back(std::vector<int>{a, b, c});
  return out;
}

// Random dense binary datasets for property tests and oracle comparisons.
inline BinaryDataset make_random_dataset(std::uint64_t seed, int n, int d,
                                         bool with_groups = false,
                                         double density = 0.5) {
  std::mt19937_64 rng(seed);
  auto coin = [&](double p) {
    return (rng() >> 11) * 0x1.0p-53 < p;
  };
  BinaryDataset ds(n, d);
  bool has_pos = false, has_neg = false;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) ds.set_bit(i, j, coin(density));
    int y = coin(0.5) ? 1 : -1;
    ds.set_label(i, y);
    (y > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos) ds.set_label(0, 1);
  if (!has_neg) ds.set_label(n - 1, -1);
  if (with_groups) {
    std::vector<std::int8_t> g(n);
    for (int i = 0; i < n; ++i) g[i] = coin(0.5) ? 1 : 2;
    g[0] = 1;
    g[n - 1] = 2;
    ds.set_groups(std::move(g));
  }
  ds.finalize();
  return ds;
}

// Synthetic two-group tabular data with the shape of the usual fair-ML
// benchmarks: a few numeric and categorical columns, group-correlated base
// rates, label driven by a noisy linear score. Returned as CSV text so it can
// flow through the binarizer and the CLI alike.
inline std::string make_fairness_csv(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  auto unif = [&]() { return (rng() >> 11) * 0x1.0p-53; };
  std::string csv = "age,priors,score,charge,sex,race,label\n";
  for (int i = 0; i < n; ++i) {
    bool group1 = unif() < 0.6;
    int age = 18 + static_cast<int>(unif() * 50);
    int priors = static_cast<int>(unif() * unif() * 15);
    int score = 1 + static_cast<int>(unif() * 9);
    bool felony = unif() < 0.35;
    bool male = unif() < 0.8;
    double z = 0.10 * (45 - age) + 0.5 * priors + 0.35 * score + (felony ? 0.8 : 0.0) +
               (group1 ? 0.7 : 0.0) - 3.2;
    double p = 1.0 / (1.0 + std::exp(-z));
    bool pos = unif() < p;
    csv += std::to_string(age) + "," + std::to_string(priors) + "," +
           std::to_string(score) + "," + (felony ? "F" : "M") + "," +
           (male ? "male" : "female") + "," + (group1 ? "a" : "b") + "," +
           (pos ? "1" : "0") + "\n";
  }
  return csv;
}

// All 958 terminal tic-tac-toe boards (x moves first), nine categorical cells
// with values x/o/b and a positive class of "x has three in a row".
struct TttRow {
  std::array<char, 9> cell;
  bool x_wins;
};

inline bool ttt_wins(const std::array<char, 9>& b, char p) {
  static const int lines[8][3] = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6},
                                  {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6}};
  for (auto& l : lines)
    if (b[l[0]] == p && b[l[1]] == p && b[l[2]] == p) return true;
  return false;
}

inline void ttt_enumerate(std::array<char, 9>& board, int to_move, int filled,
                          std::set<std::array<char, 9>>& out) {
  bool xw = ttt_wins(board, 'x');
  bool ow = ttt_wins(board, 'o');
  if (xw || ow || filled == 9) {
    out.insert(board);
    return;
  }
  char p = to_move == 0 ? 'x' : 'o';
  for (int c = 0; c < 9; ++c) {
    if (board[c] != 'b') continue;
    board[c] = p;
    ttt_enumerate(board, 1 - to_move, filled + 1, out);
    board[c] = 'b';
  }
}

inline std::vector<TttRow> make_tictactoe_rows() {
  std::array<char, 9> board;
  board.fill('b');
  std::set<std::array<char, 9>> boards;
  ttt_enumerate(board, 0, 0, boards);
  std::vector<TttRow> rows;
  rows.reserve(boards.size());
  for (const auto& b : boards) rows.push_back({b, ttt_wins(b, 'x')});
  return rows;
}

}  // namespace rftest
