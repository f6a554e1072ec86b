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
// File: context_tree.hpp
// -----------------------------------------------------------------------------
//
// Proper m-ary context trees (the model class of variable-memory chains),
// their per-leaf parameter vectors, the depth-D model prior, and exhaustive
// enumeration of small model classes.
//
// A tree node is identified by its context. Descending to child j appends the
// symbol j one step further into the past, so the path root -> x_{n-1} ->
// x_{n-2} -> ... spells the context most-recent-first.
//
// Canonical text form: a leaf is "()"; an internal node is "(" followed by
// the forms of its m children in symbol order, then ")". The complete binary
// tree of depth 1 is "(()())".

#ifndef BCT_CONTEXT_TREE_HPP_
#define BCT_CONTEXT_TREE_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bct/common.hpp"

namespace bct {

class ContextTree {
 public:
  using NodeId = std::int32_t;
  static constexpr NodeId kNone = -1;

  /// The root-only tree Λ.
  explicit ContextTree(std::size_t m) : m_(m) {
    check_alphabet(m);
    nodes_.push_back(Node{kNone, 0});
  }

  static ContextTree complete(std::size_t m, std::size_t depth) {
    ContextTree t(m);
    std::vector<NodeId> frontier{t.root()};
    for (std::size_t d = 0; d < depth; ++d) {
      std::vector<NodeId> next;
      for (NodeId id : frontier) {
        t.split_node(id);
        for (Symbol j = 0; j < m; ++j) next.push_back(t.child(id, j));
      }
      frontier = std::move(next);
    }
    return t;
  }

  /// Parses the canonical text form. Whitespace is ignored.
  static ContextTree parse(std::string_view text, std::size_t m) {
    ContextTree t(m);
    std::size_t pos = 0;
    auto skip_ws = [&] {
      while (pos < text.size() &&
             (text[pos] == ' ' || text[pos] == '\n' || text[pos] == '\t' ||
              text[pos] == '\r')) {
        ++pos;
      }
    };
    auto fail = [&](const std::string& msg) -> void {
      throw ParseError("tree: " + msg, 1, pos + 1);
    };
    std::function<void(NodeId)> parse_node = [&](NodeId id) {
      skip_ws();
      if (pos >= text.size() || text[pos] != '(') fail("expected '('");
      ++pos;
      skip_ws();
      if (pos < text.size() && text[pos] == ')') {
        ++pos;
        return;
      }
      t.split_node(id);
      for (Symbol j = 0; j < m; ++j) {
        skip_ws();
        if (pos < text.size() && text[pos] == ')') {
          fail("internal node has " + std::to_string(j) + " children, expected " +
               std::to_string(m));
        }
        parse_node(t.child(id, j));
      }
      skip_ws();
      if (pos >= text.size() || text[pos] != ')') {
        fail("internal node has more than " + std::to_string(m) + " children");
      }
      ++pos;
    };
    parse_node(t.root());
    skip_ws();
    if (pos != text.size()) fail("trailing characters after tree");
    return t;
  }

  std::string to_string() const {
    std::string out;
    std::function<void(NodeId)> emit = [&](NodeId id) {
      out += '(';
      if (!is_leaf(id)) {
        for (Symbol j = 0; j < m_; ++j) emit(child(id, j));
      }
      out += ')';
    };
    emit(root());
    return out;
  }

  std::size_t alphabet_size() const { return m_; }
  NodeId root() const { return 0; }
  std::size_t node_count() const { return nodes_.size(); }
  bool is_leaf(NodeId id) const { return nodes_[id].first_child == kNone; }
  NodeId child(NodeId id, Symbol j) const {
    return nodes_[id].first_child == kNone ? kNone
                                           : nodes_[id].first_child + NodeId(j);
  }
  std::size_t node_depth(NodeId id) const { return nodes_[id].depth; }

  /// Number of leaves |T|.
  std::size_t leaf_count() const {
    std::size_t n = 0;
    for (const Node& node : nodes_) n += node.first_child == kNone;
    return n;
  }

  /// L_d(T): number of leaves at depth exactly d.
  std::size_t leaves_at_depth(std::size_t d) const {
    std::size_t n = 0;
    for (const Node& node : nodes_) {
      n += node.first_child == kNone && node.depth == d;
    }
    return n;
  }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const Node& node : nodes_) d = std::max<std::size_t>(d, node.depth);
    return d;
  }

  /// Leaf contexts in depth-first, symbol order.
  std::vector<Context> leaves() const {
    std::vector<Context> out;
    Context path;
    visit_leaves(root(), path, out);
    return out;
  }

  /// Contexts of internal nodes in depth-first, symbol order.
  std::vector<Context> internal_nodes() const {
    std::vector<Context> out;
    Context path;
    std::function<void(NodeId)> walk = [&](NodeId id) {
      if (is_leaf(id)) return;
      out.push_back(path);
      for (Symbol j = 0; j < m_; ++j) {
        path.push_back(j);
        walk(child(id, j));
        path.pop_back();
      }
    };
    walk(root());
    return out;
  }

  /// Node reached by following `s` from the root, or kNone.
  NodeId find(const Context& s) const {
    NodeId id = root();
    for (Symbol x : s) {
      if (x >= m_ || is_leaf(id)) return kNone;
      id = child(id, x);
    }
    return id;
  }

  bool is_leaf_context(const Context& s) const {
    NodeId id = find(s);
    return id != kNone && is_leaf(id);
  }

  /// Turns the leaf at `s` into an internal node with m leaf children.
  void split(const Context& s) {
    NodeId id = find(s);
    if (id == kNone || !is_leaf(id)) {
      throw StructuralError("cannot split " + context_to_string(s, m_) +
                            ": not a leaf");
    }
    split_node(id);
  }

  /// The unique leaf that is a suffix of `past`. `past` is in chronological
  /// order, so its last element is the most recent symbol.
  Context context_of(std::span<const Symbol> past) const {
    Context s;
    NodeId id = root();
    std::size_t k = past.size();
    while (!is_leaf(id)) {
      if (k == 0) {
        throw InputError("past of length " + std::to_string(past.size()) +
                         " is shorter than the matching tree path");
      }
      Symbol x = past[--k];
      if (x >= m_) throw InputError("symbol out of range in past");
      s.push_back(x);
      id = child(id, x);
    }
    return s;
  }

  friend bool operator==(const ContextTree& a, const ContextTree& b) {
    return a.m_ == b.m_ && a.to_string() == b.to_string();
  }

 private:
  struct Node {
    NodeId first_child;
    std::uint32_t depth;
  };

  void split_node(NodeId id) {
    NodeId first = static_cast<NodeId>(nodes_.size());
    std::uint32_t d = nodes_[id].depth + 1;
    for (std::size_t j = 0; j < m_; ++j) nodes_.push_back(Node{kNone, d});
    nodes_[id].first_child = first;
  }

  void visit_leaves(NodeId id, Context& path, std::vector<Context>& out) const {
    if (is_leaf(id)) {
      out.push_back(path);
      return;
    }
    for (Symbol j = 0; j < m_; ++j) {
      path.push_back(j);
      visit_leaves(child(id, j), path, out);
      path.pop_back();
    }
  }

  std::size_t m_;
  std::vector<Node> nodes_;
};

/// theta = {theta_s : s in leaves(T)}, one probability vector per leaf.
struct ParameterVector {
  std::map<Context, std::vector<double>> theta;

  const std::vector<double>& at(const Context& s) const {
    auto it = theta.find(s);
    if (it == theta.end()) {
      throw StructuralError("no parameters for context " + context_to_string(s));
    }
    return it->second;
  }

  /// Builds parameters from rows listed in canonical leaf order.
  static ParameterVector from_rows(const ContextTree& tree,
                                   const std::vector<std::vector<double>>& rows) {
    auto leaves = tree.leaves();
    if (rows.size() != leaves.size()) {
      throw StructuralError("expected " + std::to_string(leaves.size()) +
                            " parameter rows, got " + std::to_string(rows.size()));
    }
    ParameterVector p;
    for (std::size_t i = 0; i < leaves.size(); ++i) p.theta[leaves[i]] = rows[i];
    return p;
  }

  /// Builds parameters from the free coordinates phi_s(0..m-2); the last
  /// coordinate is one minus their sum.
  static ParameterVector from_phi(const ContextTree& tree,
                                  const std::vector<std::vector<double>>& phi) {
    std::vector<std::vector<double>> rows;
    for (const auto& f : phi) {
      std::vector<double> row(f);
      double sum = 0.0;
      for (double x : f) sum += x;
      row.push_back(1.0 - sum);
      rows.push_back(std::move(row));
    }
    return from_rows(tree, rows);
  }

  std::vector<std::vector<double>> phi() const {
    std::vector<std::vector<double>> out;
    for (const auto& [s, row] : theta) {
      out.emplace_back(row.begin(), row.end() - 1);
    }
    return out;
  }
};

/// Throws unless `theta` is defined exactly on leaves(T) with valid
/// probability vectors (nonnegative, summing to one within 1e-12).
inline void validate_parameters(const ContextTree& tree,
                                const ParameterVector& theta) {
  auto leaves = tree.leaves();
  if (leaves.size() != theta.theta.size()) {
    throw StructuralError("parameter map does not match the leaves of the tree");
  }
  for (const Context& s : leaves) {
    auto it = theta.theta.find(s);
    if (it == theta.theta.end()) {
      throw StructuralError("missing parameters for leaf " +
                            context_to_string(s, tree.alphabet_size()));
    }
    const auto& row = it->second;
    if (row.size() != tree.alphabet_size()) {
      throw StructuralError("parameter row has wrong length at leaf " +
                            context_to_string(s, tree.alphabet_size()));
    }
    double sum = 0.0;
    for (double x : row) {
      if (!(x >= 0.0)) throw DomainError("negative probability in theta");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw DomainError("theta row at " +
                        context_to_string(s, tree.alphabet_size()) +
                        " does not sum to one");
    }
  }
}

/// Natural-log model prior log pi_D(T; beta) =
/// (|T|-1) log alpha + (|T| - L_D(T)) log beta, alpha = (1-beta)^{1/(m-1)}.
inline double prior_log(const ContextTree& tree, std::size_t max_depth,
                        double beta) {
  check_beta(beta);
  if (tree.depth() > max_depth) {
    throw StructuralError("tree depth " + std::to_string(tree.depth()) +
                          " exceeds maximum depth " + std::to_string(max_depth));
  }
  const double m = static_cast<double>(tree.alphabet_size());
  const double leaves = static_cast<double>(tree.leaf_count());
  const double full_depth = static_cast<double>(tree.leaves_at_depth(max_depth));
  const double log_alpha = std::log1p(-beta) / (m - 1.0);
  return (leaves - 1.0) * log_alpha + (leaves - full_depth) * std::log(beta);
}

/// Number of proper m-ary trees of depth <= D, saturating at +inf.
inline double model_count(std::size_t m, std::size_t max_depth) {
  double n = 1.0;
  for (std::size_t d = 1; d <= max_depth; ++d) n = 1.0 + std::pow(n, double(m));
  return n;
}

/// Default cap for enumerate_models: admits m=2 up to D=4 (677 models) and
/// m=3 up to D=2 (9 models), refusing m=3, D=3 (730 models).
inline constexpr double kMaxEnumeratedModels = 700.0;

/// Every proper m-ary tree of depth <= D, without duplicates.
inline std::vector<ContextTree> enumerate_models(
    std::size_t m, std::size_t max_depth,
    double cap = kMaxEnumeratedModels) {
  check_alphabet(m);
  const double count = model_count(m, max_depth);
  if (count > cap) {
    throw CapacityError("enumeration of depth-" + std::to_string(max_depth) +
                        " trees over " + std::to_string(m) +
                        " symbols would produce " + std::to_string(count) +
                        " models, above the cap of " + std::to_string(cap));
  }
  // Canonical forms by depth bound, then parse.
  std::vector<std::string> forms{"()"};
  for (std::size_t d = 1; d <= max_depth; ++d) {
    std::vector<std::string> next{"()"};
    std::vector<std::size_t> idx(m, 0);
    while (true) {
      std::string s = "(";
      for (std::size_t j = 0; j < m; ++j) s += forms[idx[j]];
      s += ")";
      next.push_back(std::move(s));
      std::size_t k = 0;
      while (k < m && ++idx[k] == forms.size()) idx[k++] = 0;
      if (k == m) break;
    }
    forms = std::move(next);
  }
  std::vector<ContextTree> out;
  out.reserve(forms.size());
  for (const auto& f : forms) out.push_back(ContextTree::parse(f, m));
  return out;
}

/// T with S grafted at leaf t. The result has depth
/// <= max_depth; prior(T u S) = prior(T) * prior_{D-|t|}(S) / beta.
inline ContextTree join_subtree(const ContextTree& tree, const Context& t,
                                const ContextTree& sub, std::size_t max_depth) {
  const std::size_t m = tree.alphabet_size();
  if (sub.alphabet_size() != m) {
    throw StructuralError("subtree alphabet size differs");
  }
  if (!tree.is_leaf_context(t)) {
    throw StructuralError("graft point " + context_to_string(t, m) +
                          " is not a leaf");
  }
  if (tree.depth() > max_depth || t.size() + sub.depth() > max_depth) {
    throw StructuralError("grafted subtree exceeds maximum depth");
  }
  ContextTree out = tree;
  std::function<void(ContextTree::NodeId, Context&)> graft =
      [&](ContextTree::NodeId id, Context& at) {
        if (sub.is_leaf(id)) return;
        out.split(at);
        for (Symbol j = 0; j < m; ++j) {
          at.push_back(j);
          graft(sub.child(id, j), at);
          at.pop_back();
        }
      };
  Context at = t;
  graft(sub.root(), at);
  return out;
}

/// True iff T is Λ or every sibling group made entirely of leaves has two
/// members whose parameter vectors differ by more than `tol` in max-norm.
inline bool is_minimal(const ContextTree& tree, const ParameterVector& theta,
                       double tol = 1e-12) {
  validate_parameters(tree, theta);
  const std::size_t m = tree.alphabet_size();
  for (const Context& s : tree.internal_nodes()) {
    auto id = tree.find(s);
    bool all_leaves = true;
    for (Symbol j = 0; j < m; ++j) all_leaves &= tree.is_leaf(tree.child(id, j));
    if (!all_leaves) continue;
    std::vector<const std::vector<double>*> rows;
    for (Symbol j = 0; j < m; ++j) {
      Context sj = s;
      sj.push_back(j);
      rows.push_back(&theta.at(sj));
    }
    bool differs = false;
    for (std::size_t a = 0; a < m && !differs; ++a) {
      for (std::size_t b = a + 1; b < m && !differs; ++b) {
        for (std::size_t k = 0; k < m; ++k) {
          if (std::abs((*rows[a])[k] - (*rows[b])[k]) > tol) differs = true;
        }
      }
    }
    if (!differs) return false;
  }
  return true;
}

}  // namespace bct

#endif  // BCT_CONTEXT_TREE_HPP_
