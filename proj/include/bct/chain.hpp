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
// File: chain.hpp
// -----------------------------------------------------------------------------
//
// Variable-memory Markov chains: simulation, the stationary law of the
// lifted first-order chain Z_n = X_{n-D+1}^n on A^D, ergodicity checks and
// the entropy-rate functional.
//
// Lifted states are encoded as base-m integers with the most recent symbol
// in the least significant digit.

#ifndef BCT_CHAIN_HPP_
#define BCT_CHAIN_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "bct/common.hpp"
#include "bct/context_tree.hpp"
#include "bct/counting.hpp"
#include "bct/ctw.hpp"

namespace bct {

struct ChainSpec {
  std::size_t m = 2;
  std::size_t depth = 0;  // D: memory length of the lifted chain
  ContextTree tree{2};
  ParameterVector theta;

  void validate() const {
    check_alphabet(m);
    if (tree.alphabet_size() != m) {
      throw StructuralError("chain tree alphabet differs from m");
    }
    if (tree.depth() > depth) {
      throw StructuralError("chain tree deeper than D");
    }
    validate_parameters(tree, theta);
  }

  /// theta at the leaf selected by `past` (chronological).
  const std::vector<double>& law(std::span<const Symbol> past) const {
    return theta.at(tree.context_of(past));
  }
};

/// Draws x_1..x_n after `context` (chronological, D symbols). Deterministic
/// for a given generator state.
template <class Rng>
SymbolSequence generate(const ChainSpec& spec, std::size_t n,
                        std::span<const Symbol> context, Rng& rng) {
  spec.validate();
  if (context.size() != spec.depth) {
    throw InputError("initial context must have D symbols");
  }
  SymbolSequence seq;
  seq.context.assign(context.begin(), context.end());
  seq.body.reserve(n);
  // Leaf parameters looked up by node id to keep the inner loop cheap.
  std::vector<const std::vector<double>*> by_node(spec.tree.node_count(), nullptr);
  for (const Context& s : spec.tree.leaves()) {
    by_node[spec.tree.find(s)] = &spec.theta.at(s);
  }
  std::vector<Symbol> history(context.begin(), context.end());
  history.reserve(context.size() + n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto id = spec.tree.root();
    std::size_t k = history.size();
    while (!spec.tree.is_leaf(id)) id = spec.tree.child(id, history[--k]);
    const auto& row = *by_node[id];
    const double u = unif(rng);
    double acc = 0.0;
    // The last symbol with positive mass absorbs rounding.
    Symbol x = 0;
    for (Symbol j = 0; j < spec.m; ++j) {
      if (row[j] > 0) x = j;
    }
    for (Symbol j = 0; j < spec.m; ++j) {
      acc += row[j];
      if (u < acc && row[j] > 0) {
        x = j;
        break;
      }
    }
    seq.body.push_back(x);
    history.push_back(x);
  }
  return seq;
}

inline SymbolSequence generate(const ChainSpec& spec, std::size_t n,
                               std::span<const Symbol> context,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return generate(spec, n, context, rng);
}

/// Default cap on m^D for the lifted chain.
inline constexpr std::size_t kMaxLiftedStates = std::size_t{1} << 20;

struct ErgodicityResult {
  bool irreducible = false;
  std::uint64_t period = 0;
  bool ergodic() const { return irreducible && period == 1; }
};

namespace detail {

inline std::size_t lifted_state_count(std::size_t m, std::size_t depth,
                                      std::size_t cap) {
  double count = std::pow(double(m), double(depth));
  if (count > double(cap)) {
    throw CapacityError("lifted chain has " + std::to_string(count) +
                        " states, above the cap of " + std::to_string(cap));
  }
  return static_cast<std::size_t>(count);
}

// Transition row of each lifted state: theta at the tree leaf its newest
// symbols select.
inline std::vector<const std::vector<double>*> lifted_rows(const ChainSpec& spec,
                                                           std::size_t states) {
  std::vector<const std::vector<double>*> rows(states);
  std::vector<Symbol> past(spec.depth);
  for (std::size_t z = 0; z < states; ++z) {
    std::size_t v = z;
    for (std::size_t k = 0; k < spec.depth; ++k) {
      past[spec.depth - 1 - k] = static_cast<Symbol>(v % spec.m);
      v /= spec.m;
    }
    rows[z] = &spec.law(past);
  }
  return rows;
}

}  // namespace detail

/// Irreducibility (strong connectivity of the whole lifted graph) and the
/// period (gcd of level differences along edges of a BFS tree).
inline ErgodicityResult check_ergodicity(const ChainSpec& spec,
                                         std::size_t cap = kMaxLiftedStates) {
  spec.validate();
  const std::size_t m = spec.m;
  const std::size_t states = detail::lifted_state_count(m, spec.depth, cap);
  const std::size_t modulus = states;
  auto rows = detail::lifted_rows(spec, states);
  auto next_state = [&](std::size_t z, Symbol j) {
    return spec.depth == 0 ? 0 : (z * m) % modulus + j;
  };
  auto bfs = [&](bool reverse, std::vector<std::int64_t>& level) {
    level.assign(states, -1);
    std::queue<std::size_t> q;
    level[0] = 0;
    q.push(0);
    std::vector<std::vector<std::size_t>> preds;
    if (reverse) {
      preds.resize(states);
      for (std::size_t z = 0; z < states; ++z) {
        for (Symbol j = 0; j < m; ++j) {
          if ((*rows[z])[j] > 0) preds[next_state(z, j)].push_back(z);
        }
      }
    }
    while (!q.empty()) {
      std::size_t z = q.front();
      q.pop();
      auto visit = [&](std::size_t y) {
        if (level[y] < 0) {
          level[y] = level[z] + 1;
          q.push(y);
        }
      };
      if (reverse) {
        for (std::size_t y : preds[z]) visit(y);
      } else {
        for (Symbol j = 0; j < m; ++j) {
          if ((*rows[z])[j] > 0) visit(next_state(z, j));
        }
      }
    }
  };
  ErgodicityResult res;
  std::vector<std::int64_t> fwd, bwd;
  bfs(false, fwd);
  bfs(true, bwd);
  res.irreducible = true;
  for (std::size_t z = 0; z < states; ++z) {
    if (fwd[z] < 0 || bwd[z] < 0) res.irreducible = false;
  }
  if (!res.irreducible) return res;
  std::uint64_t g = 0;
  for (std::size_t z = 0; z < states; ++z) {
    for (Symbol j = 0; j < m; ++j) {
      if ((*rows[z])[j] <= 0) continue;
      std::int64_t diff = fwd[z] + 1 - fwd[next_state(z, j)];
      g = std::gcd(g, static_cast<std::uint64_t>(diff < 0 ? -diff : diff));
    }
  }
  res.period = g;
  return res;
}

/// Stationary law of the lifted chain and the derived context masses.
class StationaryDistribution {
 public:
  StationaryDistribution(std::size_t m, std::size_t depth, std::vector<double> probs,
                         double residual, std::size_t iterations)
      : m_(m),
        depth_(depth),
        probs_(std::move(probs)),
        residual_(residual),
        iterations_(iterations) {}

  std::size_t alphabet_size() const { return m_; }
  std::size_t depth() const { return depth_; }
  const std::vector<double>& lifted() const { return probs_; }
  double residual() const { return residual_; }
  std::size_t iterations() const { return iterations_; }

  /// pi(s): stationary probability that the |s| most recent symbols spell s
  /// (most recent first). Requires |s| <= D.
  double mass(const Context& s) const {
    if (s.size() > depth_) {
      throw StructuralError("context longer than the chain memory");
    }
    std::size_t block = 1;
    std::size_t code = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      code += s[k] * block;
      block *= m_;
    }
    double total = 0.0;
    for (std::size_t z = 0; z < probs_.size(); ++z) {
      if (z % block == code) total += probs_[z];
    }
    return total;
  }

 private:
  std::size_t m_;
  std::size_t depth_;
  std::vector<double> probs_;
  double residual_;
  std::size_t iterations_;
};

/// Left fixed vector of the lifted kernel by power iteration (L1 residual
/// below `tolerance`). Throws ErgodicityError for reducible or periodic
/// chains and CapacityError above `cap` states.
inline StationaryDistribution stationary(const ChainSpec& spec,
                                         std::size_t cap = kMaxLiftedStates,
                                         double tolerance = 1e-12,
                                         std::size_t max_iterations = 1000000) {
  auto erg = check_ergodicity(spec, cap);
  if (!erg.irreducible) throw ErgodicityError("lifted chain is reducible");
  if (erg.period != 1) {
    throw ErgodicityError("lifted chain is periodic with period " +
                          std::to_string(erg.period));
  }
  const std::size_t m = spec.m;
  const std::size_t states = detail::lifted_state_count(m, spec.depth, cap);
  auto rows = detail::lifted_rows(spec, states);
  std::vector<double> pi(states, 1.0 / double(states));
  std::vector<double> next(states);
  double residual = 1.0;
  std::size_t it = 0;
  while (it < max_iterations) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t z = 0; z < states; ++z) {
      for (Symbol j = 0; j < m; ++j) {
        const std::size_t y = spec.depth == 0 ? 0 : (z * m) % states + j;
        next[y] += pi[z] * (*rows[z])[j];
      }
    }
    double sum = 0.0;
    for (double x : next) sum += x;
    residual = 0.0;
    for (std::size_t z = 0; z < states; ++z) {
      next[z] /= sum;
      residual += std::abs(next[z] - pi[z]);
    }
    pi.swap(next);
    ++it;
    if (residual < tolerance) break;
  }
  if (residual >= tolerance) {
    throw ErgodicityError("power iteration did not converge; residual " +
                          std::to_string(residual));
  }
  return StationaryDistribution(m, spec.depth, std::move(pi), residual, it);
}

/// theta*_s(j): probability that j follows context s under the stationary
/// law. For contexts at or below a leaf of the chain's tree this is that
/// leaf's parameter row; above it, the ratio of stationary masses.
inline std::vector<double> stationary_conditional(const ChainSpec& spec,
                                                  const StationaryDistribution& pi,
                                                  const Context& s) {
  // Deep enough to reach a leaf of the chain's tree?
  auto id = spec.tree.root();
  std::size_t k = 0;
  while (!spec.tree.is_leaf(id) && k < s.size()) id = spec.tree.child(id, s[k++]);
  if (spec.tree.is_leaf(id)) {
    Context leaf(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k));
    return spec.theta.at(leaf);
  }
  // Joint mass of (s, next = j) over lifted states z whose newest symbols
  // spell s, with the transition row of z.
  const std::size_t m = spec.m;
  std::size_t block = 1;
  std::size_t code = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    code += s[i] * block;
    block *= m;
  }
  auto rows = detail::lifted_rows(spec, pi.lifted().size());
  std::vector<double> joint(m, 0.0);
  double total = 0.0;
  for (std::size_t z = 0; z < rows.size(); ++z) {
    if (z % block != code) continue;
    for (Symbol j = 0; j < m; ++j) joint[j] += pi.lifted()[z] * (*rows[z])[j];
    total += pi.lifted()[z];
  }
  if (!(total > 0.0)) {
    throw DomainError("context " + context_to_string(s, m) +
                      " has zero stationary mass");
  }
  for (double& x : joint) x /= total;
  return joint;
}

/// pi(s) for every leaf of `tree`.
inline std::map<Context, double> leaf_masses(const ContextTree& tree,
                                             const StationaryDistribution& pi) {
  std::map<Context, double> out;
  for (const Context& s : tree.leaves()) out[s] = pi.mass(s);
  return out;
}

/// theta* extended to the leaves of an arbitrary tree of depth <= D.
inline ParameterVector extended_parameters(const ChainSpec& spec,
                                           const StationaryDistribution& pi,
                                           const ContextTree& tree) {
  ParameterVector out;
  for (const Context& s : tree.leaves()) {
    out.theta[s] = stationary_conditional(spec, pi, s);
  }
  return out;
}

/// H(X|T) = -sum_s pi(s) sum_j theta_s(j) log theta_s(j), in nats.
inline double entropy_rate(const ContextTree& tree, const ParameterVector& theta,
                           const std::map<Context, double>& masses) {
  double h = 0.0;
  for (const Context& s : tree.leaves()) {
    auto it = masses.find(s);
    if (it == masses.end() || !(it->second > 0.0)) {
      throw DomainError("leaf " + context_to_string(s, tree.alphabet_size()) +
                        " has no positive stationary mass");
    }
    double hs = 0.0;
    for (double p : theta.at(s)) {
      if (p > 0.0) hs -= p * std::log(p);
    }
    h += it->second * hs;
  }
  return h;
}

/// Draws x_{-D+1}^0 from the stationary law of the lifted chain.
template <class Rng>
std::vector<Symbol> draw_stationary_context(const StationaryDistribution& pi,
                                            Rng& rng) {
  std::discrete_distribution<std::size_t> pick(pi.lifted().begin(), pi.lifted().end());
  std::size_t z = pick(rng);
  std::vector<Symbol> ctx(pi.depth());
  for (std::size_t k = 0; k < pi.depth(); ++k) {
    ctx[pi.depth() - 1 - k] = static_cast<Symbol>(z % pi.alphabet_size());
    z /= pi.alphabet_size();
  }
  return ctx;
}

struct SmbtReport {
  std::size_t n = 0;
  std::string tree;
  double normalized_neg_log_marginal = 0.0;  // -log P(x|T) / n
  double entropy_rate = 0.0;
  double gap = 0.0;  // first minus second
};

/// Simulates n symbols and compares -log P(x|T)/n with H(X|T).
inline SmbtReport smbt_check(const ChainSpec& spec, const ContextTree& tree,
                             std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("smbt_check needs n >= 1");
  if (tree.depth() > spec.depth) {
    throw StructuralError("model deeper than the chain memory");
  }
  StationaryDistribution pi = stationary(spec);
  std::mt19937_64 rng(seed);
  auto ctx = draw_stationary_context(pi, rng);
  SymbolSequence seq = generate(spec, n, ctx, rng);
  CountTrie trie = build_counts(seq, spec.m, spec.depth);
  SmbtReport r;
  r.n = n;
  r.tree = tree.to_string();
  r.normalized_neg_log_marginal = -marginal_log(tree, trie) / double(n);
  r.entropy_rate =
      entropy_rate(tree, extended_parameters(spec, pi, tree), leaf_masses(tree, pi));
  r.gap = r.normalized_neg_log_marginal - r.entropy_rate;
  return r;
}

}  // namespace bct

#endif  // BCT_CHAIN_HPP_
