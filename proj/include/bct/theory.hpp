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
//
// -----------------------------------------------------------------------------
// File: theory.hpp
// -----------------------------------------------------------------------------
//
// Computable redundancy bounds for the CTW mixture against any fixed chain
// (T, theta), and simulation suites that track the asymptotic behaviour of
// the MAP model, the model posterior, parameter posteriors and the
// posterior predictive distribution on data drawn from a known chain.

#ifndef BCT_THEORY_HPP_
#define BCT_THEORY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "bct/chain.hpp"
#include "bct/common.hpp"
#include "bct/context_tree.hpp"
#include "bct/counting.hpp"
#include "bct/ctw.hpp"
#include "bct/inference.hpp"
#include "bct/parallel.hpp"

namespace bct {

/// C(T, m, beta) = (|T|(m-1)/2) log|T| - |T| log m + log pi_D(T; beta).
/// Valid in the O(log n) redundancy bound for n >= e|T|.
inline double redundancy_constant(const ContextTree& tree, double beta,
                                std::size_t max_depth) {
  const double leaves = static_cast<double>(tree.leaf_count());
  const double m = static_cast<double>(tree.alphabet_size());
  return 0.5 * leaves * (m - 1.0) * std::log(leaves) - leaves * std::log(m) +
         prior_log(tree, max_depth, beta);
}

/// Per-leaf constant of the count-based CTW redundancy bound: log m.
inline double ctw_leaf_constant(std::size_t m) { return std::log(double(m)); }

/// Per-leaf constant of the minimax lower bound:
/// log( sqrt(2 pi) / (2^{m/2} Gamma(m/2)) ).
inline double minimax_leaf_constant(std::size_t m) {
  const double half = 0.5 * double(m);
  return 0.5 * std::log(2.0 * std::numbers::pi) - half * std::numbers::ln2 -
         std::lgamma(half);
}

/// Delta_m = log m - log( sqrt(2 pi) / (2^{m/2} Gamma(m/2)) ): the per-leaf
/// gap between the CTW redundancy bound and the minimax bound.
inline double delta_m(std::size_t m) {
  check_alphabet(m);
  const double half = 0.5 * double(m);
  if (m > 100) {
    return std::log(double(m)) + half * std::numbers::ln2 + std::lgamma(half) -
           0.5 * std::log(2.0 * std::numbers::pi);
  }
  return std::log(double(m) * std::pow(2.0, half) * std::tgamma(half) /
                  std::sqrt(2.0 * std::numbers::pi));
}

struct RegretReport {
  std::size_t n = 0;
  double log_mixture = 0.0;     // log P*_D(x)
  double log_likelihood = 0.0;  // log P(x | theta, T)
  double regret = 0.0;          // log_mixture - log_likelihood
  double count_bound = 0.0;
  double count_slack = 0.0;
  bool log_n_applicable = false;  // n >= e |T|
  double log_n_bound = 0.0;
  double log_n_slack = 0.0;
};

/// Redundancy of the CTW mixture against the fixed chain (T, theta) on
/// `seq`, with both lower bounds on the regret and their slack.
inline RegretReport regret_report(const SymbolSequence& seq,
                                  const ContextTree& tree,
                                  const ParameterVector& theta, double beta) {
  const std::size_t m = tree.alphabet_size();
  const std::size_t max_depth = seq.context.size();
  validate_parameters(tree, theta);
  CountTrie trie = build_counts(seq, m, max_depth);
  RegretReport r;
  r.n = seq.body.size();
  r.log_mixture = ctw_mix_log(trie, beta);
  r.log_likelihood = log_likelihood(tree, theta, trie);
  r.regret = r.log_mixture - r.log_likelihood;
  const double log_prior = prior_log(tree, max_depth, beta);
  double penalty = 0.0;
  for (const Context& s : tree.leaves()) {
    auto a = trie.counts_at(s);
    Count total = 0;
    for (Count c : a) total += c;
    if (total == 0) continue;
    penalty += 0.5 * double(m - 1) * std::log(double(total)) + std::log(double(m));
  }
  r.count_bound = -(penalty - log_prior);
  r.count_slack = r.regret - r.count_bound;
  const double leaves = double(tree.leaf_count());
  r.log_n_applicable = double(r.n) >= std::numbers::e * leaves;
  if (r.log_n_applicable) {
    r.log_n_bound = -0.5 * leaves * double(m - 1) * std::log(double(r.n)) +
                       redundancy_constant(tree, beta, max_depth);
    r.log_n_slack = r.regret - r.log_n_bound;
  }
  return r;
}

struct ConsistencyPoint {
  std::size_t n = 0;
  double recovery_fraction = 0.0;   // share of replicates with MAP == T*
  double mean_posterior = 0.0;      // mean pi(T* | x)
  double mean_parameter_error = 0.0;  // mean max-norm |posterior mean - theta*|
};

struct ConsistencyReport {
  std::string true_tree;
  double beta = 0.0;
  std::size_t replicates = 0;
  std::vector<ConsistencyPoint> points;
  /// False with a single grid point; the trend flags are then vacuous.
  bool monotonicity_testable = false;
  bool recovery_nondecreasing = true;
  bool posterior_nondecreasing = true;
  bool error_nonincreasing = true;
};

/// Simulates `replicates` trajectories from `spec` and, at each n of the
/// grid (prefixes of one trajectory), records MAP recovery, posterior mass of
/// T* and the posterior-mean parameter error. Trends allow a slack of one
/// replicate (1/replicates) for the two fractions.
inline ConsistencyReport consistency_suite(const ChainSpec& spec, double beta,
                                           std::vector<std::size_t> n_grid,
                                           std::size_t replicates,
                                           std::uint64_t seed) {
  check_beta(beta);
  if (!is_minimal(spec.tree, spec.theta)) {
    throw StructuralError("consistency suite needs a minimal model");
  }
  StationaryDistribution pi = stationary(spec);
  std::sort(n_grid.begin(), n_grid.end());
  const std::size_t points = n_grid.size();
  const std::string truth = spec.tree.to_string();

  // result[r * points + k]
  struct Cell {
    bool recovered = false;
    double posterior = 0.0;
    double error = 0.0;
  };
  std::vector<Cell> cells(replicates * points);
  parallel_for(replicates, [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(seed, r));
    auto ctx = draw_stationary_context(pi, rng);
    const std::size_t n_max = points ? n_grid.back() : 0;
    SymbolSequence seq = generate(spec, n_max, ctx, rng);
    CountTrie trie(spec.m, spec.depth);
    std::vector<Symbol> history = seq.context;
    history.reserve(seq.context.size() + n_max);
    std::size_t consumed = 0;
    for (std::size_t k = 0; k < points; ++k) {
      for (; consumed < n_grid[k]; ++consumed) {
        Symbol x = seq.body[consumed];
        trie.update(x, history);
        history.push_back(x);
      }
      Cell& c = cells[r * points + k];
      c.recovered = map_tree(trie, beta).tree.to_string() == truth;
      c.posterior = std::exp(model_posterior_log(spec.tree, trie, beta));
      auto mean = posterior_moments(full_conditional(trie, spec.tree)).mean;
      for (const auto& [s, row] : mean.theta) {
        const auto& star = spec.theta.at(s);
        for (std::size_t j = 0; j < row.size(); ++j) {
          c.error = std::max(c.error, std::abs(row[j] - star[j]));
        }
      }
    }
  });

  ConsistencyReport rep;
  rep.true_tree = truth;
  rep.beta = beta;
  rep.replicates = replicates;
  for (std::size_t k = 0; k < points; ++k) {
    ConsistencyPoint p;
    p.n = n_grid[k];
    for (std::size_t r = 0; r < replicates; ++r) {
      const Cell& c = cells[r * points + k];
      p.recovery_fraction += c.recovered;
      p.mean_posterior += c.posterior;
      p.mean_parameter_error += c.error;
    }
    if (replicates > 0) {
      p.recovery_fraction /= double(replicates);
      p.mean_posterior /= double(replicates);
      p.mean_parameter_error /= double(replicates);
    }
    rep.points.push_back(p);
  }
  rep.monotonicity_testable = points >= 2;
  const double slack = replicates ? 1.0 / double(replicates) : 0.0;
  for (std::size_t k = 1; k < points; ++k) {
    const auto& a = rep.points[k - 1];
    const auto& b = rep.points[k];
    if (b.recovery_fraction < a.recovery_fraction - slack - 1e-12) {
      rep.recovery_nondecreasing = false;
    }
    if (b.mean_posterior < a.mean_posterior - slack - 1e-12) {
      rep.posterior_nondecreasing = false;
    }
    if (b.mean_parameter_error > a.mean_parameter_error) rep.error_nonincreasing = false;
  }
  return rep;
}

struct ZetaSummary {
  Context context;
  double mean = 0.0;
  double max = 0.0;
};

struct PredictiveReport {
  std::size_t n = 0;
  std::size_t replicates = 0;
  /// Per replicate: max_j |P*(j | x) - theta*_{context}(j)| at the end.
  std::vector<double> deviations;
  double mean_max_deviation = 0.0;
  /// zeta at each internal node of T* across replicates.
  std::vector<ZetaSummary> zeta;
};

/// Runs the sequential mixture over `replicates` simulated paths of length
/// n and compares the final predictive law with the true conditional law.
inline PredictiveReport predictive_suite(const ChainSpec& spec, double beta,
                                         std::size_t n, std::size_t replicates,
                                         std::uint64_t seed) {
  check_beta(beta);
  StationaryDistribution pi = stationary(spec);
  auto internal = spec.tree.internal_nodes();
  PredictiveReport rep;
  rep.n = n;
  rep.replicates = replicates;
  rep.deviations.assign(replicates, 0.0);
  std::vector<std::vector<double>> zetas(replicates,
                                         std::vector<double>(internal.size(), 0.0));
  parallel_for(replicates, [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(seed, r));
    auto ctx = draw_stationary_context(pi, rng);
    SymbolSequence seq = generate(spec, n, ctx, rng);
    CtwState state(spec.m, spec.depth, beta, seq.context);
    for (Symbol x : seq.body) state.update(x);
    auto pred = state.predictive();
    const auto& truth = spec.law(state.window());
    double dev = 0.0;
    for (std::size_t j = 0; j < spec.m; ++j) {
      dev = std::max(dev, std::abs(pred[j] - truth[j]));
    }
    rep.deviations[r] = dev;
    for (std::size_t i = 0; i < internal.size(); ++i) {
      zetas[r][i] = std::exp(state.log_zeta(internal[i]));
    }
  });
  for (double d : rep.deviations) rep.mean_max_deviation += d;
  if (replicates > 0) rep.mean_max_deviation /= double(replicates);
  for (std::size_t i = 0; i < internal.size(); ++i) {
    ZetaSummary z;
    z.context = internal[i];
    for (std::size_t r = 0; r < replicates; ++r) {
      z.mean += zetas[r][i];
      z.max = std::max(z.max, zetas[r][i]);
    }
    if (replicates > 0) z.mean /= double(replicates);
    rep.zeta.push_back(z);
  }
  return rep;
}

}  // namespace bct

#endif  // BCT_THEORY_HPP_
