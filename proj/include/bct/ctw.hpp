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
// File: ctw.hpp
// -----------------------------------------------------------------------------
//
// Context-tree weighting over the model class of proper trees of depth <= D.
//
// At each node s of the count trie
//
//   P_w(s) = P_e(a_s)                                   if |s| = D
//   P_w(s) = beta P_e(a_s) + (1 - beta) prod_j P_w(sj)  otherwise
//
// and P_w at the root is the prior predictive likelihood
// sum_T pi_D(T) P(x | T). Contexts that never occurred have P_e = P_w = 1.
// All quantities are natural logs.
//
// The module provides the batch recursion, a sequential state with O(D)
// updates and exact next-symbol predictions, per-model marginal likelihoods
// and posteriors, and the MAP model.

#ifndef BCT_CTW_HPP_
#define BCT_CTW_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "bct/common.hpp"
#include "bct/context_tree.hpp"
#include "bct/counting.hpp"
#include "bct/estimator.hpp"

namespace bct {

/// log P_w at every materialized trie node, indexed by node id.
inline std::vector<double> ctw_node_log_pw(const CountTrie& trie, double beta) {
  check_beta(beta);
  const std::size_t m = trie.alphabet_size();
  const std::size_t max_depth = trie.max_depth();
  const double log_beta = std::log(beta);
  const double log_split = std::log1p(-beta);
  std::vector<double> pw(trie.node_count(), 0.0);
  for (std::size_t i = trie.node_count(); i-- > 0;) {
    const auto id = static_cast<CountTrie::NodeId>(i);
    const double pe = pe_log(trie.counts(id));
    if (trie.node_depth(id) == max_depth) {
      pw[i] = pe;
      continue;
    }
    double children = 0.0;
    for (Symbol j = 0; j < m; ++j) {
      auto c = trie.child(id, j);
      if (c != CountTrie::kAbsent) children += pw[c];
    }
    pw[i] = log_add(log_beta + pe, log_split + children);
  }
  return pw;
}

/// log P*_D(x): the CTW mixture at the root.
inline double ctw_mix_log(const CountTrie& trie, double beta) {
  return ctw_node_log_pw(trie, beta)[0];
}

/// log P(x | T) = sum over leaves s of T of log P_e(a_s).
inline double marginal_log(const ContextTree& tree, const CountTrie& trie) {
  if (tree.alphabet_size() != trie.alphabet_size()) {
    throw StructuralError("tree and trie alphabet sizes differ");
  }
  if (tree.depth() > trie.max_depth()) {
    throw StructuralError("model deeper than the count trie");
  }
  const std::size_t m = tree.alphabet_size();
  double total = 0.0;
  // Paired descent; an absent trie node contributes zero below it.
  std::vector<std::pair<ContextTree::NodeId, CountTrie::NodeId>> stack{
      {tree.root(), trie.root()}};
  while (!stack.empty()) {
    auto [t, c] = stack.back();
    stack.pop_back();
    if (c == CountTrie::kAbsent) continue;
    if (tree.is_leaf(t)) {
      total += pe_log(trie.counts(c));
      continue;
    }
    for (Symbol j = 0; j < m; ++j) stack.emplace_back(tree.child(t, j), trie.child(c, j));
  }
  return total;
}

/// log pi(T | x) = log pi_D(T) + log P(x|T) - log P*_D(x).
inline double model_posterior_log(const ContextTree& tree, const CountTrie& trie,
                                  double beta) {
  return prior_log(tree, trie.max_depth(), beta) + marginal_log(tree, trie) -
         ctw_mix_log(trie, beta);
}

struct MapResult {
  ContextTree tree;
  /// max_T log pi_D(T) + log P(x|T).
  double log_posterior_unnorm;
};

namespace detail {

// Ties within this relative margin resolve to the pruned (leaf) option.
inline bool prefer_leaf(double leaf, double split) {
  const double scale = std::max({1.0, std::abs(leaf), std::abs(split)});
  return leaf >= split - 1e-12 * scale;
}

}  // namespace detail

/// The MAP model argmax_T pi(T | x) over proper trees of depth <= D, by the
/// maximizing analogue of the CTW recursion with argmax backtracking.
///
/// A context that never occurred contributes only prior mass below it, so
/// the best subtree there depends only on its depth; for beta < 1/2 that
/// subtree can be a split rather than a leaf.
inline MapResult map_tree(const CountTrie& trie, double beta) {
  check_beta(beta);
  const std::size_t m = trie.alphabet_size();
  const std::size_t max_depth = trie.max_depth();
  const double log_beta = std::log(beta);
  const double log_split = std::log1p(-beta);

  // Best prior-only value for an unobserved subtree rooted at depth d.
  std::vector<double> empty_best(max_depth + 1, 0.0);
  std::vector<char> empty_leaf(max_depth + 1, 1);
  for (std::size_t d = max_depth; d-- > 0;) {
    const double split = log_split + double(m) * empty_best[d + 1];
    empty_leaf[d] = detail::prefer_leaf(log_beta, split);
    empty_best[d] = empty_leaf[d] ? log_beta : split;
  }

  std::vector<double> best(trie.node_count(), 0.0);
  std::vector<char> leaf(trie.node_count(), 1);
  for (std::size_t i = trie.node_count(); i-- > 0;) {
    const auto id = static_cast<CountTrie::NodeId>(i);
    const std::size_t d = trie.node_depth(id);
    const double pe = pe_log(trie.counts(id));
    if (d == max_depth) {
      best[i] = pe;
      continue;
    }
    double split = log_split;
    for (Symbol j = 0; j < m; ++j) {
      auto c = trie.child(id, j);
      split += c == CountTrie::kAbsent ? empty_best[d + 1] : best[c];
    }
    const double as_leaf = log_beta + pe;
    leaf[i] = detail::prefer_leaf(as_leaf, split);
    best[i] = leaf[i] ? as_leaf : split;
  }

  ContextTree tree(m);
  struct Frame {
    CountTrie::NodeId node;  // kAbsent for unobserved contexts
    Context context;
  };
  std::vector<Frame> stack{{trie.root(), {}}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const std::size_t d = f.context.size();
    if (d == max_depth) continue;
    const bool stop = f.node == CountTrie::kAbsent ? empty_leaf[d] : leaf[f.node];
    if (stop) continue;
    tree.split(f.context);
    for (Symbol j = 0; j < m; ++j) {
      Context sj = f.context;
      sj.push_back(j);
      auto c = f.node == CountTrie::kAbsent ? CountTrie::kAbsent
                                            : trie.child(f.node, j);
      stack.push_back({c, std::move(sj)});
    }
  }
  return {std::move(tree), best[0]};
}

/// Per-path decomposition of the posterior predictive into the KT
/// conditionals along the context path s_0 = root, ..., s_D.
struct MixtureDiagnostics {
  /// log zeta_{s_t} = log P_e(s_t) - sum_j log P_w(s_t j), t = 0..D-1.
  std::vector<double> log_zeta;
  /// Weight of the KT conditional at s_t, t = 0..D. Nonnegative, sum to 1.
  std::vector<double> coefficients;
  /// KT conditional at s_t for every symbol: row t, column j.
  std::vector<std::vector<double>> conditionals;

  /// sum_t coefficients[t] * conditionals[t][j].
  std::vector<double> reconstruct() const {
    std::vector<double> out(conditionals.empty() ? 0 : conditionals[0].size(), 0.0);
    for (std::size_t t = 0; t < coefficients.size(); ++t) {
      for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] += coefficients[t] * conditionals[t][j];
      }
    }
    return out;
  }
};

/// Sequential CTW: counts, log P_e and log P_w per node, updated along one
/// context path per symbol.
class CtwState {
 public:
  using NodeId = CountTrie::NodeId;

  /// `initial_context` is x_{-D+1}^0 in chronological order.
  CtwState(std::size_t m, std::size_t max_depth, double beta,
           std::span<const Symbol> initial_context)
      : trie_(m, max_depth),
        beta_(beta),
        log_beta_(std::log(beta)),
        log_split_(std::log1p(-beta)),
        window_(initial_context.begin(), initial_context.end()) {
    check_beta(beta);
    if (window_.size() != max_depth) {
      throw InputError("initial context has " + std::to_string(window_.size()) +
                       " symbols, expected " + std::to_string(max_depth));
    }
    for (Symbol x : window_) {
      if (x >= m) throw InputError("initial context symbol out of range");
    }
    sync_arrays();
  }

  std::size_t alphabet_size() const { return trie_.alphabet_size(); }
  std::size_t max_depth() const { return trie_.max_depth(); }
  double beta() const { return beta_; }
  const CountTrie& trie() const { return trie_; }

  double log_pe(NodeId id) const { return log_pe_[id]; }
  double log_pw(NodeId id) const { return log_pw_[id]; }

  /// log P*_D of the consumed body.
  double log_probability() const { return log_pw_[0]; }

  /// The last D symbols, chronological.
  std::span<const Symbol> window() const { return window_; }

  /// Current depth-D context, most recent first.
  Context current_context() const {
    return Context(window_.rbegin(), window_.rend());
  }

  /// Consumes `next` and returns log P*_D(next | past).
  double update(Symbol next) {
    const std::size_t m = alphabet_size();
    if (next >= m) {
      throw InputError("symbol " + std::to_string(next) +
                       " outside alphabet of size " + std::to_string(m));
    }
    const double before = log_pw_[0];
    trie_.ensure_path(window_, path_);
    sync_arrays();
    for (NodeId id : path_) {
      log_pe_[id] += std::log(pe_step(trie_.counts(id), next));
      trie_.increment(id, next);
    }
    const std::size_t max_depth = trie_.max_depth();
    for (std::size_t t = path_.size(); t-- > 0;) {
      const NodeId id = path_[t];
      if (t == max_depth) {
        log_pw_[id] = log_pe_[id];
      } else {
        log_pw_[id] = log_add(log_beta_ + log_pe_[id], log_split_ + child_sum(id));
      }
    }
    if (max_depth > 0) {
      std::move(window_.begin() + 1, window_.end(), window_.begin());
      window_.back() = next;
    }
    return log_pw_[0] - before;
  }

  /// P*_D(j | past) for every j, without changing the state.
  std::vector<double> predictive() const {
    const std::size_t m = alphabet_size();
    std::vector<NodeId> path = lookup_path(current_context());
    std::vector<double> out(m);
    for (Symbol j = 0; j < m; ++j) {
      out[j] = std::exp(hypothetical_root(path, j) - log_pw_[0]);
    }
    return out;
  }

  /// Diagnostics along a depth-D path (most recent first).
  MixtureDiagnostics mixture_diagnostics(const Context& path_context) const {
    const std::size_t m = alphabet_size();
    const std::size_t max_depth = trie_.max_depth();
    if (path_context.size() != max_depth) {
      throw StructuralError("diagnostics path must have length D");
    }
    std::vector<NodeId> path = lookup_path(path_context);
    MixtureDiagnostics out;
    out.conditionals.resize(max_depth + 1);
    for (std::size_t t = 0; t <= max_depth; ++t) {
      std::vector<double>& row = out.conditionals[t];
      row.resize(m);
      for (Symbol j = 0; j < m; ++j) {
        row[j] = path[t] == CountTrie::kAbsent ? 1.0 / double(m)
                                               : pe_step(trie_.counts(path[t]), j);
      }
    }
    // w_t = beta zeta / ((1-beta) + beta zeta), evaluated as a logistic.
    double remaining = 1.0;
    for (std::size_t t = 0; t < max_depth; ++t) {
      const double lz = path[t] == CountTrie::kAbsent ? 0.0 : log_zeta_node(path[t]);
      out.log_zeta.push_back(lz);
      const double x = log_beta_ + lz - log_split_;
      const double w = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                              : std::exp(x) / (1.0 + std::exp(x));
      out.coefficients.push_back(remaining * w);
      remaining *= 1.0 - w;
    }
    out.coefficients.push_back(remaining);
    return out;
  }

  /// log zeta_s for an internal context s (|s| < D); 0 if s never occurred.
  double log_zeta(const Context& s) const {
    if (s.size() >= trie_.max_depth()) {
      throw StructuralError("zeta is defined only at internal contexts");
    }
    NodeId id = trie_.find(s);
    return id == CountTrie::kAbsent ? 0.0 : log_zeta_node(id);
  }

 private:
  void sync_arrays() {
    log_pe_.resize(trie_.node_count(), 0.0);
    log_pw_.resize(trie_.node_count(), 0.0);
  }

  double child_sum(NodeId id) const {
    double sum = 0.0;
    for (Symbol j = 0; j < alphabet_size(); ++j) {
      NodeId c = trie_.child(id, j);
      if (c != CountTrie::kAbsent) sum += log_pw_[c];
    }
    return sum;
  }

  double log_zeta_node(NodeId id) const { return log_pe_[id] - child_sum(id); }

  std::vector<NodeId> lookup_path(const Context& s) const {
    std::vector<NodeId> path{trie_.root()};
    NodeId id = trie_.root();
    for (Symbol x : s) {
      id = id == CountTrie::kAbsent ? CountTrie::kAbsent : trie_.child(id, x);
      path.push_back(id);
    }
    return path;
  }

  // Root log P_w after a hypothetical update with `j` along `path`.
  double hypothetical_root(const std::vector<NodeId>& path, Symbol j) const {
    const std::size_t m = alphabet_size();
    const std::size_t max_depth = trie_.max_depth();
    const double kt_uniform = std::log(1.0 / double(m));
    double below = 0.0;
    for (std::size_t t = path.size(); t-- > 0;) {
      const NodeId id = path[t];
      double pe_new;
      double pw_old_child = 0.0;
      double siblings = 0.0;
      if (id == CountTrie::kAbsent) {
        pe_new = kt_uniform;
      } else {
        pe_new = log_pe_[id] + std::log(pe_step(trie_.counts(id), j));
        if (t < max_depth) {
          siblings = child_sum(id);
          NodeId c = path[t + 1];
          if (c != CountTrie::kAbsent) pw_old_child = log_pw_[c];
        }
      }
      if (t == max_depth) {
        below = pe_new;
      } else {
        below = log_add(log_beta_ + pe_new,
                        log_split_ + siblings - pw_old_child + below);
      }
    }
    return below;
  }

  CountTrie trie_;
  double beta_;
  double log_beta_;
  double log_split_;
  std::vector<Symbol> window_;
  std::vector<double> log_pe_;
  std::vector<double> log_pw_;
  std::vector<NodeId> path_;
};

}  // namespace bct

#endif  // BCT_CTW_HPP_
