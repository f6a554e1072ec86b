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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "bct/chain.hpp"
#include "bct/ctw.hpp"
#include "oracles.hpp"

namespace {

using bct::Context;
using bct::ContextTree;
using bct::Symbol;
using bct::SymbolSequence;

struct Case {
  std::size_t m;
  std::size_t depth;
  double beta;
  SymbolSequence seq;
};

std::vector<Case> random_cases(std::uint64_t seed, int count, std::size_t m,
                               std::size_t max_depth, std::size_t max_n) {
  std::mt19937_64 rng(seed);
  const double betas[] = {0.3, 0.5, 0.7};
  std::vector<Case> out;
  for (int i = 0; i < count; ++i) {
    Case c;
    c.m = m;
    c.depth = rng() % (max_depth + 1);
    c.beta = betas[i % 3];
    c.seq.context = oracle::random_symbols(m, c.depth, rng());
    // Skewed sources give MAP trees other than the root.
    std::vector<Symbol> raw = oracle::random_symbols(m, rng() % (max_n + 1), rng());
    if (i % 2) {
      for (std::size_t k = 1; k < raw.size(); ++k) {
        if (rng() % 4) raw[k] = raw[k - 1];
      }
    }
    c.seq.body = raw;
    out.push_back(c);
  }
  return out;
}

TEST(CtwMix, DepthZeroIsKt) {
  SymbolSequence seq{{}, {0, 1, 1, 0, 0}};
  auto trie = bct::build_counts(seq, 2, 0);
  EXPECT_NEAR(bct::ctw_mix_log(trie, 0.3), oracle::kt_direct({3, 2}), 1e-14);
}

TEST(CtwMix, HandExample) {
  auto trie = bct::build_counts({{0}, {0, 1, 1}}, 2, 1);
  EXPECT_NEAR(std::exp(bct::ctw_mix_log(trie, 0.5)), 1.0 / 16.0, 1e-15);
}

TEST(CtwMix, EqualsEnumeratedMixtureFromRawStrings) {
  for (std::size_t m : {2u, 3u}) {
    const std::size_t max_depth = m == 2 ? 3 : 2;
    std::vector<std::vector<ContextTree>> models;
    for (std::size_t d = 0; d <= max_depth; ++d) models.push_back(bct::enumerate_models(m, d));
    for (const auto& c : random_cases(41 + m, 120, m, max_depth, 100)) {
      auto trie = bct::build_counts(c.seq, c.m, c.depth);
      const double expect = oracle::naive_mixture(models[c.depth], c.seq, c.depth, c.beta);
      EXPECT_NEAR(bct::ctw_mix_log(trie, c.beta), expect, 1e-10 * std::max(1.0, std::abs(expect)));
    }
  }
}

TEST(CtwMix, SumsToOneOverAllStrings) {
  for (std::size_t d = 0; d <= 2; ++d) {
    for (double beta : {0.3, 0.5, 0.7}) {
      for (std::size_t n = 1; n <= 8; ++n) {
        std::vector<Symbol> ctx(d, 1);
        std::vector<double> terms;
        for (const auto& body : oracle::all_strings(2, n)) {
          terms.push_back(bct::ctw_mix_log(bct::build_counts({ctx, body}, 2, d), beta));
        }
        EXPECT_NEAR(std::exp(oracle::log_sum_exp(terms)), 1.0, 1e-10);
      }
    }
  }
  // Ternary alphabet, shorter strings.
  std::vector<double> terms;
  for (const auto& body : oracle::all_strings(3, 5)) {
    terms.push_back(bct::ctw_mix_log(bct::build_counts({{2, 0}, body}, 3, 2), 0.4));
  }
  EXPECT_NEAR(std::exp(oracle::log_sum_exp(terms)), 1.0, 1e-10);
}

TEST(MarginalLog, RootOnlyTreeIsKt) {
  SymbolSequence seq{{1, 0}, {0, 0, 1, 0, 1}};
  auto trie = bct::build_counts(seq, 2, 2);
  EXPECT_NEAR(bct::marginal_log(ContextTree(2), trie), bct::pe_log(trie.counts_at({})), 1e-15);
}

TEST(MarginalLog, MatchesRawStringComputation) {
  for (const auto& c : random_cases(7, 40, 2, 3, 150)) {
    auto trie = bct::build_counts(c.seq, c.m, c.depth);
    for (const auto& t : bct::enumerate_models(2, c.depth)) {
      EXPECT_NEAR(bct::marginal_log(t, trie), oracle::naive_marginal(t, c.seq), 1e-10);
    }
  }
}

TEST(MarginalLog, AdditiveUnderGrafting) {
  SymbolSequence seq{{0, 1, 1}, oracle::random_symbols(2, 200, 9)};
  auto trie = bct::build_counts(seq, 2, 3);
  ContextTree base = ContextTree::parse("(()(()()))", 2);
  ContextTree sub = ContextTree::complete(2, 1);
  ContextTree joined = bct::join_subtree(base, {0}, sub, 3);
  const double expected = bct::marginal_log(base, trie) - bct::pe_log(trie.counts_at({0})) +
                          bct::pe_log(trie.counts_at({0, 0})) +
                          bct::pe_log(trie.counts_at({0, 1}));
  EXPECT_NEAR(bct::marginal_log(joined, trie), expected, 1e-12);
}

TEST(ModelPosterior, Examples) {
  auto empty = bct::build_counts({{}, {0, 1, 1}}, 2, 0);
  EXPECT_NEAR(bct::model_posterior_log(ContextTree(2), empty, 0.4), 0.0, 1e-15);
  auto trie = bct::build_counts({{0}, {0, 1, 1}}, 2, 1);
  EXPECT_NEAR(std::exp(bct::model_posterior_log(ContextTree(2), trie, 0.5)), 0.5, 1e-14);
}

TEST(ModelPosterior, NormalizesUnderEnumeration) {
  for (const auto& c : random_cases(13, 60, 2, 3, 100)) {
    auto trie = bct::build_counts(c.seq, c.m, c.depth);
    std::vector<double> terms;
    for (const auto& t : bct::enumerate_models(2, c.depth)) {
      const double lp = bct::model_posterior_log(t, trie, c.beta);
      EXPECT_LE(lp, 1e-12);
      terms.push_back(lp);
    }
    EXPECT_NEAR(std::exp(oracle::log_sum_exp(terms)), 1.0, 1e-10);
  }
}

TEST(MapTree, EmptyDataGivesPriorMode) {
  for (std::size_t d : {0u, 1u, 3u}) {
    auto trie = bct::build_counts({std::vector<Symbol>(d, 0), {}}, 2, d);
    EXPECT_EQ(bct::map_tree(trie, 0.5).tree.to_string(), "()");
    EXPECT_EQ(bct::map_tree(trie, 0.7).tree.to_string(), "()");
  }
  // For beta < 1/2 splitting is a priori favoured, so the prior mode is the
  // complete tree; it must agree with enumeration.
  auto trie = bct::build_counts({{0, 0}, {}}, 2, 2);
  for (double beta : {0.3, 0.5, 0.7}) {
    double best = -INFINITY;
    ContextTree arg(2);
    for (const auto& t : bct::enumerate_models(2, 2)) {
      const double v = bct::prior_log(t, 2, beta);
      if (v > best + 1e-12) {
        best = v;
        arg = t;
      }
    }
    auto got = bct::map_tree(trie, beta);
    EXPECT_EQ(got.tree, arg) << beta;
    EXPECT_NEAR(got.log_posterior_unnorm, best, 1e-12);
  }
}

TEST(MapTree, TieResolvesToLeaf) {
  // At beta = 1/2 with no data, leaf and split at depth 0 of D = 1 are tied.
  auto trie = bct::build_counts({{1}, {}}, 2, 1);
  EXPECT_EQ(bct::map_tree(trie, 0.5).tree.to_string(), "()");
}

TEST(MapTree, EqualsEnumeratedArgmax) {
  int compared = 0;
  for (std::size_t m : {2u, 3u}) {
    const std::size_t max_depth = m == 2 ? 3 : 2;
    for (const auto& c : random_cases(97 + m, 300, m, max_depth, 100)) {
      auto trie = bct::build_counts(c.seq, c.m, c.depth);
      std::vector<std::pair<double, ContextTree>> scored;
      for (const auto& t : bct::enumerate_models(m, c.depth)) {
        scored.emplace_back(oracle::prior_formula(t, c.depth, c.beta) +
                                oracle::naive_marginal(t, c.seq),
                            t);
      }
      std::sort(scored.begin(), scored.end(),
                [](const auto& a, const auto& b) { return a.first > b.first; });
      if (scored.size() > 1 && scored[0].first - scored[1].first <= 1e-9) continue;
      ++compared;
      auto got = bct::map_tree(trie, c.beta);
      EXPECT_EQ(got.tree, scored[0].second);
      EXPECT_NEAR(got.log_posterior_unnorm, scored[0].first, 1e-10);
    }
  }
  EXPECT_GT(compared, 500);
}

TEST(MapTree, RecoversFairCoinRootOnlyModel) {
  bct::ChainSpec coin;
  coin.m = 2;
  coin.depth = 5;
  coin.tree = ContextTree(2);
  coin.theta = bct::ParameterVector::from_rows(coin.tree, {{0.5, 0.5}});
  int recovered = 0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    std::vector<Symbol> ctx(5, 0);
    auto seq = bct::generate(coin, 10000, ctx, bct::derive_seed(1234, r));
    auto trie = bct::build_counts(seq, 2, 5);
    recovered += bct::map_tree(trie, 0.5).tree.to_string() == "()";
  }
  EXPECT_GE(recovered, 19);
}

TEST(MapTree, RejectsBadBeta) {
  auto trie = bct::build_counts({{}, {0}}, 2, 0);
  EXPECT_THROW(bct::map_tree(trie, 1.0), bct::ParameterError);
  EXPECT_THROW(bct::ctw_mix_log(trie, 0.0), bct::ParameterError);
}

TEST(CtwState, FirstSymbolIsUniform) {
  bct::CtwState st(2, 0, 0.3, std::vector<Symbol>{});
  EXPECT_EQ(st.predictive(), (std::vector<double>{0.5, 0.5}));
  EXPECT_NEAR(st.update(1), std::log(0.5), 1e-15);
  bct::CtwState st3(3, 2, 0.5, std::vector<Symbol>{2, 1});
  for (double p : st3.predictive()) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
}

TEST(CtwState, TelescopesToBatchMixture) {
  for (const auto& c : random_cases(61, 60, 3, 4, 300)) {
    bct::CtwState st(c.m, c.depth, c.beta, c.seq.context);
    double sum = 0.0;
    for (Symbol x : c.seq.body) sum += st.update(x);
    const double batch = bct::ctw_mix_log(bct::build_counts(c.seq, c.m, c.depth), c.beta);
    EXPECT_NEAR(sum, batch, 1e-9 * std::max(1.0, std::abs(batch)));
    EXPECT_NEAR(st.log_probability(), batch, 1e-9 * std::max(1.0, std::abs(batch)));
  }
}

TEST(CtwState, PredictiveMatchesBatchRatio) {
  for (const auto& c : random_cases(67, 60, 2, 3, 60)) {
    bct::CtwState st(c.m, c.depth, c.beta, c.seq.context);
    for (Symbol x : c.seq.body) st.update(x);
    const double base = bct::ctw_mix_log(bct::build_counts(c.seq, c.m, c.depth), c.beta);
    auto pred = st.predictive();
    double total = 0.0;
    for (Symbol j = 0; j < c.m; ++j) {
      SymbolSequence ext = c.seq;
      ext.body.push_back(j);
      const double ratio =
          std::exp(bct::ctw_mix_log(bct::build_counts(ext, c.m, c.depth), c.beta) - base);
      EXPECT_NEAR(pred[j], ratio, 1e-10);
      total += pred[j];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(CtwState, ExactlyOnePathChanges) {
  const std::size_t d = 4;
  SymbolSequence seq{oracle::random_symbols(2, d, 3), oracle::random_symbols(2, 200, 4)};
  bct::CtwState st(2, d, 0.5, seq.context);
  for (std::size_t i = 0; i + 1 < seq.body.size(); ++i) st.update(seq.body[i]);
  std::vector<double> before(st.trie().node_count());
  for (std::size_t id = 0; id < before.size(); ++id) {
    before[id] = st.log_pw(static_cast<bct::CountTrie::NodeId>(id));
  }
  st.update(seq.body.back());
  std::size_t changed = 0;
  for (std::size_t id = 0; id < st.trie().node_count(); ++id) {
    const double now = st.log_pw(static_cast<bct::CountTrie::NodeId>(id));
    if (id >= before.size() || now != before[id]) ++changed;
  }
  EXPECT_EQ(changed, d + 1);
}

TEST(CtwState, NodeValuesMatchBatchRecursion) {
  for (const auto& c : random_cases(71, 40, 2, 5, 500)) {
    bct::CtwState st(c.m, c.depth, c.beta, c.seq.context);
    for (Symbol x : c.seq.body) st.update(x);
    auto batch = bct::build_counts(c.seq, c.m, c.depth);
    auto pw = bct::ctw_node_log_pw(batch, c.beta);
    for (std::size_t k = 0; k <= c.depth; ++k) {
      for (const auto& s : oracle::all_strings(2, k)) {
        auto a = st.trie().find(s);
        auto b = batch.find(s);
        ASSERT_EQ(a == bct::CountTrie::kAbsent, b == bct::CountTrie::kAbsent);
        if (a == bct::CountTrie::kAbsent) continue;
        EXPECT_NEAR(st.log_pe(a), oracle::kt_direct(oracle::naive_counts(c.seq, 2, s)), 1e-9);
        EXPECT_NEAR(st.log_pw(a), pw[b], 1e-10 * std::max(1.0, std::abs(pw[b])));
      }
    }
  }
}

TEST(CtwState, RejectsBadInput) {
  EXPECT_THROW(bct::CtwState(2, 2, 0.5, std::vector<Symbol>{0}), bct::InputError);
  EXPECT_THROW(bct::CtwState(2, 1, 1.5, std::vector<Symbol>{0}), bct::ParameterError);
  bct::CtwState st(2, 1, 0.5, std::vector<Symbol>{0});
  EXPECT_THROW(st.update(2), bct::InputError);
}

TEST(MixtureDiagnostics, DepthZeroHasSingleCoefficient) {
  bct::CtwState st(2, 0, 0.5, std::vector<Symbol>{});
  st.update(0);
  auto diag = st.mixture_diagnostics({});
  EXPECT_EQ(diag.coefficients, std::vector<double>{1.0});
  EXPECT_TRUE(diag.log_zeta.empty());
}

TEST(MixtureDiagnostics, ConvexAndReconstructsPredictive) {
  for (const auto& c : random_cases(83, 40, 3, 4, 200)) {
    bct::CtwState st(c.m, c.depth, c.beta, c.seq.context);
    for (Symbol x : c.seq.body) st.update(x);
    auto diag = st.mixture_diagnostics(st.current_context());
    double sum = 0.0;
    for (double w : diag.coefficients) {
      EXPECT_GE(w, 0.0);
      sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    auto rebuilt = diag.reconstruct();
    auto pred = st.predictive();
    for (std::size_t j = 0; j < c.m; ++j) EXPECT_NEAR(rebuilt[j], pred[j], 1e-10);
  }
}

TEST(MixtureDiagnostics, ZetaVanishesAtTrueSplit) {
  bct::ChainSpec spec;
  spec.m = 2;
  spec.depth = 1;
  spec.tree = ContextTree::complete(2, 1);
  spec.theta = bct::ParameterVector::from_rows(spec.tree, {{0.9, 0.1}, {0.2, 0.8}});
  auto seq = bct::generate(spec, 100000, std::vector<Symbol>{0}, 2024);
  bct::CtwState st(2, 1, 0.5, seq.context);
  for (Symbol x : seq.body) st.update(x);
  EXPECT_LT(std::exp(st.log_zeta({})), 0.01);
  EXPECT_THROW(st.log_zeta({0}), bct::StructuralError);
}

TEST(PredictiveConvergence, DeterministicSourceFollowsKt) {
  // All-zero data at D = 0: the mass left on symbol 1 is (1/2)/(n+1).
  bct::CtwState st(2, 0, 0.5, std::vector<Symbol>{});
  for (std::size_t n = 1; n <= 1000; ++n) {
    st.update(0);
    if (n % 100 == 0) {
      EXPECT_NEAR(st.predictive()[1], 0.5 / double(n + 1), 1e-14);
    }
  }
}

}  // namespace
