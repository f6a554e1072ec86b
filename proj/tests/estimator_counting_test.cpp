// Copyright 2026 The bct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bct/counting.hpp"
#include "bct/estimator.hpp"
#include "oracles.hpp"

namespace {

using bct::Count;
using bct::Symbol;
using bct::SymbolSequence;

TEST(PeLog, HandValues) {
  EXPECT_EQ(bct::pe_log(std::vector<Count>{0, 0}), 0.0);
  EXPECT_NEAR(bct::pe_log(std::vector<Count>{1, 0}), std::log(0.5), 1e-15);
  EXPECT_NEAR(bct::pe_log(std::vector<Count>{2, 1}), std::log(1.0 / 16.0), 1e-15);
}

TEST(PeLog, MatchesDirectProduct) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    const std::size_t m = 2 + i % 5;
    std::vector<Count> a(m);
    for (auto& x : a) x = rng() % 60;
    EXPECT_NEAR(bct::pe_log(a), oracle::kt_direct(a),
                1e-11 * std::max(1.0, std::abs(oracle::kt_direct(a))));
  }
}

TEST(PeStep, HandValues) {
  EXPECT_DOUBLE_EQ(bct::pe_step(std::vector<Count>{0, 0}, 0), 0.5);
  EXPECT_DOUBLE_EQ(bct::pe_step(std::vector<Count>{1, 0}, 0), 0.75);
  EXPECT_THROW(bct::pe_step(std::vector<Count>{1, 0}, 2), bct::InputError);
}

TEST(PeStep, ChainRuleReproducesPeLog) {
  std::vector<Count> a{0, 0};
  double acc = 0.0;
  for (Symbol x : {0u, 0u, 1u}) {
    acc += std::log(bct::pe_step(a, x));
    ++a[x];
  }
  EXPECT_NEAR(acc, std::log(0.5 * 0.75 * (1.0 / 6.0)), 1e-15);
  EXPECT_NEAR(acc, bct::pe_log(std::vector<Count>{2, 1}), 1e-14);

  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t m = 2 + rep % 4;
    std::vector<Count> c(m, 0);
    double sum = 0.0;
    for (int k = 0; k < 200; ++k) {
      Symbol x = rng() % m;
      sum += std::log(bct::pe_step(c, x));
      ++c[x];
    }
    EXPECT_NEAR(sum, bct::pe_log(c), 1e-10);
  }
}

TEST(PeBounds, TightAtSingleObservation) {
  auto b = bct::pe_bounds(std::vector<Count>{1, 0});
  EXPECT_NEAR(b.lower, -std::log(2.0), 1e-15);
  EXPECT_NEAR(bct::pe_log(std::vector<Count>{1, 0}), b.lower, 1e-15);
}

TEST(PeBounds, SandwichOnRandomCounts) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t m = 2 + i % 5;
    const Count total = 1 + rng() % 10000;
    std::vector<Count> a(m, 0);
    for (Count k = 0; k < total; ++k) ++a[rng() % (i % 3 == 0 ? 1 : m)];
    const double pe = bct::pe_log(a);
    auto b = bct::pe_bounds(a);
    const double tol = 1e-12 * std::max(1.0, std::abs(pe));
    EXPECT_LE(b.lower, pe + tol);
    EXPECT_LE(pe, b.upper + tol);
  }
}

TEST(PeBounds, WidthIsIndependentOfCounts) {
  for (std::size_t m = 2; m <= 6; ++m) {
    const double md = double(m);
    const double expected = 0.5 * (md - 1.0) * std::log(2.0 * std::numbers::pi) +
                            std::log(md * std::tgamma(md / 2.0) /
                                     std::pow(std::numbers::pi, md / 2.0));
    for (Count total : {1u, 7u, 1000u}) {
      std::vector<Count> a(m, 0);
      a[0] = total;
      a[m - 1] += total / 2;
      auto b = bct::pe_bounds(a);
      EXPECT_NEAR(b.upper - b.lower, expected, 1e-10);
    }
  }
}

TEST(PeBounds, EmptyCountsRejected) {
  EXPECT_THROW(bct::pe_bounds(std::vector<Count>{0, 0}), bct::DomainError);
}

TEST(BuildCounts, EmptyBody) {
  SymbolSequence seq{{0}, {}};
  auto trie = bct::build_counts(seq, 2, 1);
  EXPECT_EQ(trie.node_count(), 1u);
  EXPECT_EQ(trie.counts_at({}), (std::vector<Count>{0, 0}));
}

TEST(BuildCounts, HandExample) {
  SymbolSequence seq{{0}, {0, 1, 1}};
  auto trie = bct::build_counts(seq, 2, 1);
  EXPECT_EQ(trie.counts_at({}), (std::vector<Count>{1, 2}));
  EXPECT_EQ(trie.counts_at({0}), (std::vector<Count>{1, 1}));
  EXPECT_EQ(trie.counts_at({1}), (std::vector<Count>{0, 1}));
}

TEST(BuildCounts, MatchesSuffixScanOnRandomStrings) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t m = 2 + rep % 3;
    const std::size_t d = rep % 5;
    SymbolSequence seq{oracle::random_symbols(m, d, rng()),
                       oracle::random_symbols(m, rng() % 300, rng())};
    auto trie = bct::build_counts(seq, m, d);
    EXPECT_EQ(trie.size(), seq.body.size());
    for (std::size_t k = 0; k <= d; ++k) {
      for (const auto& s : oracle::all_strings(m, k)) {
        EXPECT_EQ(trie.counts_at(s), oracle::naive_counts(seq, m, s));
      }
    }
  }
}

TEST(BuildCounts, ChildCountsSumToParent) {
  SymbolSequence seq{oracle::random_symbols(3, 4, 1), oracle::random_symbols(3, 500, 2)};
  auto trie = bct::build_counts(seq, 3, 4);
  for (std::size_t id = 0; id < trie.node_count(); ++id) {
    auto nid = static_cast<bct::CountTrie::NodeId>(id);
    if (trie.node_depth(nid) == 4) continue;
    std::vector<Count> sum(3, 0);
    for (Symbol j = 0; j < 3; ++j) {
      auto c = trie.child(nid, j);
      if (c == bct::CountTrie::kAbsent) continue;
      for (std::size_t k = 0; k < 3; ++k) sum[k] += trie.counts(c)[k];
    }
    for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(sum[k], trie.counts(nid)[k]);
  }
}

TEST(BuildCounts, RejectsBadInput) {
  EXPECT_THROW(bct::build_counts({{0}, {0, 2}}, 2, 1), bct::InputError);
  EXPECT_THROW(bct::build_counts({{}, {0}}, 2, 1), bct::InputError);
  EXPECT_THROW(bct::build_counts({{3}, {0}}, 2, 1), bct::InputError);
}

TEST(UpdateCounts, SingleStepExample) {
  bct::CountTrie trie = bct::build_counts({{0}, {}}, 2, 1);
  std::vector<Symbol> past{0};
  auto next = bct::update_counts(trie, 0, past);
  EXPECT_EQ(next.counts_at({}), (std::vector<Count>{1, 0}));
  EXPECT_EQ(next.counts_at({0}), (std::vector<Count>{1, 0}));
  EXPECT_EQ(next.counts_at({1}), (std::vector<Count>{0, 0}));
  // The argument is taken by value.
  EXPECT_EQ(trie.counts_at({}), (std::vector<Count>{0, 0}));
}

TEST(UpdateCounts, AgreesWithBatchAndTouchesOnePath) {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t m = 2 + rep % 2;
    const std::size_t d = rep % 6;
    SymbolSequence seq{oracle::random_symbols(m, d, rng()),
                       oracle::random_symbols(m, 1 + rng() % 100, rng())};
    SymbolSequence head = seq;
    head.body.pop_back();
    auto before = bct::build_counts(head, m, d);
    std::vector<Symbol> past = head.context;
    past.insert(past.end(), head.body.begin(), head.body.end());
    auto after = bct::update_counts(before, seq.body.back(), past);
    auto batch = bct::build_counts(seq, m, d);
    std::size_t changed = 0;
    for (std::size_t k = 0; k <= d; ++k) {
      for (const auto& s : oracle::all_strings(m, k)) {
        EXPECT_EQ(after.counts_at(s), batch.counts_at(s));
        if (after.counts_at(s) != before.counts_at(s)) ++changed;
      }
    }
    EXPECT_EQ(changed, d + 1);
  }
}

}  // namespace
