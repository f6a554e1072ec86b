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
// File: counting.hpp
// -----------------------------------------------------------------------------
//
// The count trie: for every context s of length <= D that occurs in the
// data, the vector a_s of how often each symbol followed s.
//
// Only contexts that occur are stored. A child that was never created stands
// for a completion leaf with an all-zero count vector, so the trie is always
// proper when read through `counts()` / `child()`.

#ifndef BCT_COUNTING_HPP_
#define BCT_COUNTING_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bct/common.hpp"

namespace bct {

/// x_{-D+1}^0 followed by x_1^n. Both parts are chronological.
struct SymbolSequence {
  std::vector<Symbol> context;
  std::vector<Symbol> body;
};

class CountTrie {
 public:
  using NodeId = std::int32_t;
  static constexpr NodeId kAbsent = -1;

  CountTrie(std::size_t m, std::size_t max_depth) : m_(m), depth_(max_depth) {
    check_alphabet(m);
    add_node(0);
  }

  std::size_t alphabet_size() const { return m_; }
  std::size_t max_depth() const { return depth_; }
  std::size_t node_count() const { return node_depth_.size(); }
  NodeId root() const { return 0; }

  NodeId child(NodeId id, Symbol j) const { return children_[id * m_ + j]; }
  std::size_t node_depth(NodeId id) const { return node_depth_[id]; }

  std::span<const Count> counts(NodeId id) const {
    return {counts_.data() + id * m_, m_};
  }
  Count total(NodeId id) const { return totals_[id]; }

  /// Number of body symbols consumed (M at the root).
  Count size() const { return totals_[0]; }

  /// Node for context `s` (most recent first) or kAbsent.
  NodeId find(const Context& s) const {
    NodeId id = root();
    for (Symbol x : s) {
      if (x >= m_ || id == kAbsent) return kAbsent;
      id = child(id, x);
    }
    return id;
  }

  /// a_s; the zero vector for contexts that never occurred.
  std::vector<Count> counts_at(const Context& s) const {
    if (s.size() > depth_) {
      throw StructuralError("context deeper than the trie's maximum depth");
    }
    NodeId id = find(s);
    if (id == kAbsent) return std::vector<Count>(m_, 0);
    auto c = counts(id);
    return {c.begin(), c.end()};
  }

  /// Creates (if needed) the nodes s_0 = root, s_1, ..., s_D on the context
  /// path of `past` and returns their ids, root first. `past` is
  /// chronological with at least D symbols; its last D are used.
  std::vector<NodeId> ensure_path(std::span<const Symbol> past) {
    std::vector<NodeId> path;
    ensure_path(past, path);
    return path;
  }

  void ensure_path(std::span<const Symbol> past, std::vector<NodeId>& path) {
    if (past.size() < depth_) {
      throw InputError("need " + std::to_string(depth_) +
                       " past symbols, got " + std::to_string(past.size()));
    }
    path.clear();
    NodeId id = root();
    path.push_back(id);
    for (std::size_t k = 1; k <= depth_; ++k) {
      Symbol x = past[past.size() - k];
      if (x >= m_) throw InputError("symbol out of range in past");
      NodeId next = child(id, x);
      if (next == kAbsent) {
        next = add_node(k);
        children_[id * m_ + x] = next;
      }
      id = next;
      path.push_back(id);
    }
  }

  /// a_s(j) += 1 at a single node.
  void increment(NodeId id, Symbol j) {
    ++counts_[id * m_ + j];
    ++totals_[id];
  }

  /// Adds one observation: increments a_s(next) at the D+1 nodes on the
  /// context path of `past`.
  void update(Symbol next, std::span<const Symbol> past) {
    if (next >= m_) {
      throw InputError("symbol " + std::to_string(next) +
                       " outside alphabet of size " + std::to_string(m_));
    }
    ensure_path(past, scratch_);
    for (NodeId id : scratch_) increment(id, next);
  }

 private:
  NodeId add_node(std::size_t d) {
    NodeId id = static_cast<NodeId>(node_depth_.size());
    node_depth_.push_back(static_cast<std::uint16_t>(d));
    totals_.push_back(0);
    counts_.resize(counts_.size() + m_, 0);
    children_.resize(children_.size() + m_, kAbsent);
    return id;
  }

  std::size_t m_;
  std::size_t depth_;
  // Children are always created after their parent, so ids increase with
  // depth along every path; a reverse sweep over ids is a post-order.
  std::vector<Count> counts_;
  std::vector<Count> totals_;
  std::vector<NodeId> children_;
  std::vector<std::uint16_t> node_depth_;
  std::vector<NodeId> scratch_;
};

inline void check_sequence(const SymbolSequence& seq, std::size_t m,
                           std::size_t max_depth) {
  if (seq.context.size() != max_depth) {
    throw InputError("initial context has " + std::to_string(seq.context.size()) +
                     " symbols, expected " + std::to_string(max_depth));
  }
  auto check = [&](const std::vector<Symbol>& xs, const char* part) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] >= m) {
        throw InputError(std::string("symbol ") + std::to_string(xs[i]) + " at " +
                         part + " position " + std::to_string(i) +
                         " outside alphabet of size " + std::to_string(m));
      }
    }
  };
  check(seq.context, "context");
  check(seq.body, "body");
}

/// Count trie of `seq.body` given its initial context.
inline CountTrie build_counts(const SymbolSequence& seq, std::size_t m,
                              std::size_t max_depth) {
  check_sequence(seq, m, max_depth);
  CountTrie trie(m, max_depth);
  std::vector<Symbol> history = seq.context;
  history.reserve(seq.context.size() + seq.body.size());
  for (Symbol x : seq.body) {
    trie.update(x, history);
    history.push_back(x);
  }
  return trie;
}

/// Value-returning form of CountTrie::update.
inline CountTrie update_counts(CountTrie trie, Symbol next,
                               std::span<const Symbol> past) {
  trie.update(next, past);
  return trie;
}

}  // namespace bct

#endif  // BCT_COUNTING_HPP_
