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
#include <vector>

#include <gtest/gtest.h>

#include "bct/theory.hpp"
#include "bct/verify.hpp"

namespace {

using bct::ChainSpec;
using bct::ContextTree;
using bct::ParameterVector;
using bct::Symbol;

ChainSpec iid_coin(std::size_t max_depth) {
  ChainSpec spec;
  spec.m = 2;
  spec.depth = max_depth;
  spec.tree = ContextTree(2);
  spec.theta = ParameterVector::from_rows(spec.tree, {{0.5, 0.5}});
  return spec;
}

TEST(RedundancyConstant, HandValues) {
  EXPECT_NEAR(bct::redundancy_constant(ContextTree(2), 0.5, 1), -2 * std::log(2.0), 1e-15);
  EXPECT_NEAR(bct::redundancy_constant(ContextTree::complete(2, 1), 0.5, 1),
              -2 * std::log(2.0), 1e-15);
}

TEST(RedundancyConstant, NotMonotoneInLeafCount) {
  // The (|T|(m-1)/2) log|T| term outgrows -|T| log m, so large trees have a
  // larger constant than the root-only tree.
  const std::size_t d = 6;
  const double root = bct::redundancy_constant(ContextTree(2), 0.5, d);
  const double full = bct::redundancy_constant(ContextTree::complete(2, d), 0.5, d);
  EXPECT_GT(full, root);
}

TEST(RegretReport, SingleSymbolByHand) {
  ContextTree t(2);
  auto theta = ParameterVector::from_rows(t, {{0.5, 0.5}});
  auto r = bct::regret_report({{}, {1}}, t, theta, 0.5);
  EXPECT_NEAR(r.log_mixture, std::log(0.5), 1e-15);
  EXPECT_NEAR(r.regret, 0.0, 1e-15);
  EXPECT_NEAR(r.count_bound, -std::log(2.0), 1e-15);
  EXPECT_FALSE(r.log_n_applicable);  // 1 < e
}

TEST(RegretReport, BoundsHoldOnSimulatedData) {
  bct::VerifyOptions opt;
  opt.quick = true;
  auto res = bct::check_regret_bounds(opt);
  EXPECT_TRUE(res.passed) << res.witness.dump();
  EXPECT_GT(res.detail["log_n_instances"].get<std::size_t>(), 0u);
}

TEST(RegretReport, LogNBoundOnlyFromEtimesLeaves) {
  ContextTree t = ContextTree::complete(2, 2);
  auto theta = ParameterVector::from_rows(t, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
  bct::SymbolSequence seq{{0, 0}, {0, 1, 1, 0, 1, 0, 0, 1, 1, 0}};  // n = 10 < 4e
  EXPECT_FALSE(bct::regret_report(seq, t, theta, 0.5).log_n_applicable);
  seq.body.push_back(1);  // n = 11 >= 4e
  EXPECT_TRUE(bct::regret_report(seq, t, theta, 0.5).log_n_applicable);
}

TEST(DeltaM, Values) {
  EXPECT_NEAR(bct::delta_m(2), std::log(4.0 / std::sqrt(2 * std::numbers::pi)), 1e-14);
  EXPECT_NEAR(bct::delta_m(2), 0.4674, 5e-5);
  for (std::size_t m = 2; m <= 16; ++m) {
    EXPECT_GT(bct::delta_m(m), 0.0);
    EXPECT_NEAR(bct::ctw_leaf_constant(m) - bct::minimax_leaf_constant(m), bct::delta_m(m),
                1e-12);
  }
  // Large alphabets go through the log form.
  EXPECT_NEAR(bct::delta_m(400),
              bct::ctw_leaf_constant(400) - bct::minimax_leaf_constant(400), 1e-9);
}

TEST(Consistency, RefusesNonMinimalSpec) {
  ChainSpec spec;
  spec.m = 2;
  spec.depth = 2;
  spec.tree = ContextTree::complete(2, 1);
  spec.theta = ParameterVector::from_rows(spec.tree, {{0.4, 0.6}, {0.4, 0.6}});
  EXPECT_THROW(bct::consistency_suite(spec, 0.5, {100}, 2, 1), bct::StructuralError);
}

TEST(Consistency, SingleGridPointIsFlagged) {
  auto rep = bct::consistency_suite(iid_coin(2), 0.5, {100}, 5, 1);
  ASSERT_EQ(rep.points.size(), 1u);
  EXPECT_FALSE(rep.monotonicity_testable);
}

TEST(Consistency, FairCoinRecovered) {
  auto rep = bct::consistency_suite(iid_coin(5), 0.5, {10000}, 100, 2);
  EXPECT_GE(rep.points.back().recovery_fraction, 0.95);
}

TEST(Consistency, DepthOneChainPosteriorConcentrates) {
  ChainSpec spec = bct::verify_detail::reference_chain(5);
  auto rep = bct::consistency_suite(spec, 0.5, {1000, 50000}, 30, 3);
  EXPECT_GE(rep.points.back().mean_posterior, 0.9);
  EXPECT_TRUE(rep.error_nonincreasing);
}

TEST(Consistency, ReproducibleUnderSeed) {
  ChainSpec spec = bct::verify_detail::reference_chain(3);
  auto a = bct::consistency_suite(spec, 0.5, {500, 2000}, 8, 9);
  auto b = bct::consistency_suite(spec, 0.5, {500, 2000}, 8, 9);
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    EXPECT_EQ(a.points[k].mean_posterior, b.points[k].mean_posterior);
    EXPECT_EQ(a.points[k].mean_parameter_error, b.points[k].mean_parameter_error);
  }
}

TEST(Predictive, FairCoinConverges) {
  auto rep = bct::predictive_suite(iid_coin(5), 0.5, 100000, 10, 4);
  EXPECT_LT(rep.mean_max_deviation, 0.01);
  EXPECT_TRUE(rep.zeta.empty());
}

TEST(Predictive, ZetaAtRootVanishesForDepthOneChain) {
  auto rep = bct::predictive_suite(bct::verify_detail::reference_chain(5), 0.5, 100000, 5, 6);
  ASSERT_EQ(rep.zeta.size(), 1u);
  EXPECT_LT(rep.zeta[0].max, 0.01);
}

TEST(Verify, QuickRunPasses) {
  bct::VerifyOptions opt;
  opt.quick = true;
  for (const auto& r : bct::run_verification(opt)) {
    EXPECT_TRUE(r.passed) << r.id << " " << r.detail.dump();
    EXPECT_TRUE(r.hard);
  }
}

TEST(Verify, InjectedFaultIsCaughtWithWitness) {
  bct::VerifyOptions opt;
  opt.quick = true;
  opt.inject_beta_flip = true;
  auto r = bct::check_ctw_oracle(opt);
  EXPECT_FALSE(r.passed);
  ASSERT_FALSE(r.witness.is_null());
  EXPECT_NE(r.witness["beta"].get<double>(), 0.5);
  EXPECT_TRUE(r.witness.contains("sequence"));
}

}  // namespace
