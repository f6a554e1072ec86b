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
// File: inference.hpp
// -----------------------------------------------------------------------------
//
// Parameter inference for a fixed model: maximum likelihood, the Dirichlet
// full conditional pi(theta | x, T), its moments and samples, and the
// asymptotic-covariance (Fisher) blocks used to check posterior normality.

#ifndef BCT_INFERENCE_HPP_
#define BCT_INFERENCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "bct/common.hpp"
#include "bct/context_tree.hpp"
#include "bct/counting.hpp"

namespace bct {

/// T_MAX: observed contexts as internal nodes, completed to a proper tree.
inline ContextTree tmax_tree(const CountTrie& trie) {
  const std::size_t m = trie.alphabet_size();
  ContextTree tree(m);
  std::vector<std::pair<CountTrie::NodeId, Context>> stack{{trie.root(), {}}};
  while (!stack.empty()) {
    auto [id, s] = std::move(stack.back());
    stack.pop_back();
    if (s.size() == trie.max_depth() || trie.total(id) == 0) continue;
    tree.split(s);
    for (Symbol j = 0; j < m; ++j) {
      auto c = trie.child(id, j);
      if (c == CountTrie::kAbsent) continue;
      Context sj = s;
      sj.push_back(j);
      stack.emplace_back(c, std::move(sj));
    }
  }
  return tree;
}

/// log P(x | theta, T) = sum_s sum_j a_s(j) log theta_s(j).
inline double log_likelihood(const ContextTree& tree, const ParameterVector& theta,
                             const CountTrie& trie) {
  const std::size_t m = tree.alphabet_size();
  double total = 0.0;
  for (const Context& s : tree.leaves()) {
    auto a = trie.counts_at(s);
    const auto& row = theta.at(s);
    for (std::size_t j = 0; j < m; ++j) {
      if (a[j] == 0) continue;
      if (row[j] <= 0.0) {
        throw DomainError("zero probability for symbol " + std::to_string(j) +
                          " observed after context " + context_to_string(s, m));
      }
      total += static_cast<double>(a[j]) * std::log(row[j]);
    }
  }
  return total;
}

struct MleResult {
  ContextTree tree;
  ParameterVector theta;
  double log_likelihood;
};

/// Maximum likelihood over all models of depth <= D: T_MAX with empirical
/// frequencies a_s / M_s (uniform where M_s = 0).
inline MleResult mle(const CountTrie& trie) {
  const std::size_t m = trie.alphabet_size();
  ContextTree tree = tmax_tree(trie);
  ParameterVector theta;
  double ll = 0.0;
  for (const Context& s : tree.leaves()) {
    auto a = trie.counts_at(s);
    Count total = 0;
    for (Count c : a) total += c;
    std::vector<double> row(m, 1.0 / double(m));
    if (total > 0) {
      for (std::size_t j = 0; j < m; ++j) {
        row[j] = double(a[j]) / double(total);
        if (a[j] > 0) ll += double(a[j]) * std::log(row[j]);
      }
    }
    theta.theta[s] = std::move(row);
  }
  return {std::move(tree), std::move(theta), ll};
}

/// Per-leaf Dirichlet parameters a_s(j) + 1/2.
struct DirichletPosterior {
  std::map<Context, std::vector<double>> alpha;
};

inline DirichletPosterior full_conditional(const CountTrie& trie,
                                           const ContextTree& tree) {
  if (tree.depth() > trie.max_depth()) {
    throw StructuralError("model deeper than the count trie");
  }
  DirichletPosterior post;
  for (const Context& s : tree.leaves()) {
    auto a = trie.counts_at(s);
    std::vector<double> row(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) row[j] = double(a[j]) + 0.5;
    post.alpha[s] = std::move(row);
  }
  return post;
}

/// One draw of theta from the posterior via normalised Gamma variates.
template <class Rng>
ParameterVector sample_params(const DirichletPosterior& post, Rng& rng) {
  ParameterVector out;
  for (const auto& [s, alpha] : post.alpha) {
    std::vector<double> row(alpha.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      std::gamma_distribution<double> g(alpha[j], 1.0);
      row[j] = g(rng);
      sum += row[j];
    }
    if (sum <= 0.0) {
      // All draws underflowed: put the mass on the largest shape parameter.
      auto k = std::max_element(alpha.begin(), alpha.end()) - alpha.begin();
      std::fill(row.begin(), row.end(), 0.0);
      row[k] = 1.0;
    } else {
      for (double& x : row) x /= sum;
    }
    out.theta[s] = std::move(row);
  }
  return out;
}

inline ParameterVector sample_params(const DirichletPosterior& post,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_params(post, rng);
}

struct PosteriorMoments {
  ParameterVector mean;
  std::map<Context, std::vector<double>> variance;
};

/// Closed-form Dirichlet moments: mean alpha_j / A, variance
/// alpha_j (A - alpha_j) / (A^2 (A + 1)) with A = sum_j alpha_j.
inline PosteriorMoments posterior_moments(const DirichletPosterior& post) {
  PosteriorMoments out;
  for (const auto& [s, alpha] : post.alpha) {
    double a0 = 0.0;
    for (double a : alpha) a0 += a;
    std::vector<double> mean(alpha.size());
    std::vector<double> var(alpha.size());
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      mean[j] = alpha[j] / a0;
      var[j] = alpha[j] * (a0 - alpha[j]) / (a0 * a0 * (a0 + 1.0));
    }
    out.mean.theta[s] = std::move(mean);
    out.variance[s] = std::move(var);
  }
  return out;
}

/// Dirichlet covariance -alpha_i alpha_j / (A^2 (A+1)) for i != j.
inline double dirichlet_covariance(const std::vector<double>& alpha, std::size_t i,
                                   std::size_t j) {
  double a0 = 0.0;
  for (double a : alpha) a0 += a;
  if (i == j) return alpha[i] * (a0 - alpha[i]) / (a0 * a0 * (a0 + 1.0));
  return -alpha[i] * alpha[j] / (a0 * a0 * (a0 + 1.0));
}

/// J_s = (1/pi(s)) [diag(theta_s) - theta_s^T theta_s] for one leaf.
struct FisherBlock {
  Context context;
  double mass = 0.0;
  std::vector<double> theta;
  std::vector<double> matrix;  // m x m, row-major
  /// Some theta_s(j) = 0, so the block has rank below m-1.
  bool degenerate = false;

  double at(std::size_t i, std::size_t j) const {
    return matrix[i * theta.size() + j];
  }
};

inline std::vector<FisherBlock> fisher_blocks(
    const ParameterVector& theta_star,
    const std::map<Context, double>& stationary_mass) {
  std::vector<FisherBlock> out;
  for (const auto& [s, row] : theta_star.theta) {
    auto it = stationary_mass.find(s);
    if (it == stationary_mass.end() || !(it->second > 0.0)) {
      throw DomainError("stationary mass of context " + context_to_string(s) +
                        " is zero or missing; Fisher block is singular");
    }
    const std::size_t m = row.size();
    FisherBlock b;
    b.context = s;
    b.mass = it->second;
    b.theta = row;
    b.matrix.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (row[i] <= 0.0) b.degenerate = true;
      for (std::size_t j = 0; j < m; ++j) {
        b.matrix[i * m + j] = ((i == j ? row[i] : 0.0) - row[i] * row[j]) / b.mass;
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

struct NormalityEntry {
  Context context;
  std::size_t i = 0;
  std::size_t j = 0;
  double scaled_covariance = 0.0;  // n * Cov(theta_s(i), theta_s(j) | x, T)
  double fisher = 0.0;             // J_s(i, j)
  double relative_deviation = 0.0;
};

struct NormalityReport {
  std::size_t n = 0;
  std::vector<NormalityEntry> entries;
  double max_relative_deviation_diagonal = 0.0;
  double max_relative_deviation_offdiagonal = 0.0;
  /// max over leaves and symbols of |posterior mean - theta*|.
  double max_mean_error = 0.0;
  /// Every off-diagonal pair has the same sign in both matrices.
  bool offdiagonal_signs_match = true;
};

/// Compares n times the analytic posterior covariance on T* with the
/// Fisher blocks J_s entry by entry.
inline NormalityReport normality_check(const CountTrie& trie,
                                       const ContextTree& model,
                                       const std::vector<FisherBlock>& blocks,
                                       std::size_t n) {
  DirichletPosterior post = full_conditional(trie, model);
  PosteriorMoments moments = posterior_moments(post);
  NormalityReport report;
  report.n = n;
  for (const FisherBlock& b : blocks) {
    auto it = post.alpha.find(b.context);
    if (it == post.alpha.end()) {
      throw StructuralError("Fisher block context " + context_to_string(b.context) +
                            " is not a leaf of the model");
    }
    const auto& alpha = it->second;
    const auto& mean = moments.mean.at(b.context);
    const std::size_t m = alpha.size();
    for (std::size_t i = 0; i < m; ++i) {
      report.max_mean_error =
          std::max(report.max_mean_error, std::abs(mean[i] - b.theta[i]));
      for (std::size_t j = 0; j < m; ++j) {
        NormalityEntry e;
        e.context = b.context;
        e.i = i;
        e.j = j;
        e.scaled_covariance = double(n) * dirichlet_covariance(alpha, i, j);
        e.fisher = b.at(i, j);
        e.relative_deviation =
            e.fisher == 0.0 ? std::abs(e.scaled_covariance)
                            : std::abs(e.scaled_covariance - e.fisher) / std::abs(e.fisher);
        if (i == j) {
          report.max_relative_deviation_diagonal =
              std::max(report.max_relative_deviation_diagonal, e.relative_deviation);
        } else {
          report.max_relative_deviation_offdiagonal =
              std::max(report.max_relative_deviation_offdiagonal, e.relative_deviation);
          if ((e.scaled_covariance < 0) != (e.fisher < 0)) {
            report.offdiagonal_signs_match = false;
          }
        }
        report.entries.push_back(e);
      }
    }
  }
  return report;
}

}  // namespace bct

#endif  // BCT_INFERENCE_HPP_
