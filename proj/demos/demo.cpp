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

// Simulates a depth-1 binary chain, then recovers its tree and parameters
// from the sample and compares sequential and batch evidence.

#include <cmath>
#include <cstdio>
#include <vector>

#include "bct/bct.hpp"

int main() {
  bct::ChainSpec spec;
  spec.m = 2;
  spec.depth = 5;
  spec.tree = bct::ContextTree::parse("(()())", 2);
  spec.theta = bct::ParameterVector::from_rows(spec.tree, {{0.9, 0.1}, {0.2, 0.8}});

  const std::vector<bct::Symbol> start(spec.depth, 0);
  bct::SymbolSequence seq = bct::generate(spec, 20000, start, 7);
  bct::CountTrie trie = bct::build_counts(seq, spec.m, spec.depth);

  const double beta = 0.5;
  bct::MapResult map = bct::map_tree(trie, beta);
  const double evidence = bct::ctw_mix_log(trie, beta);
  std::printf("MAP tree        %s\n", map.tree.to_string().c_str());
  std::printf("posterior mass  %.6f\n", std::exp(map.log_posterior_unnorm - evidence));

  auto mean = bct::posterior_moments(bct::full_conditional(trie, map.tree)).mean;
  for (const auto& [s, row] : mean.theta) {
    std::printf("theta[%s]       (%.4f, %.4f)\n", bct::context_to_string(s).c_str(), row[0],
                row[1]);
  }

  bct::CtwState state(spec.m, spec.depth, beta, seq.context);
  double log_prob = 0.0;
  for (bct::Symbol x : seq.body) log_prob += state.update(x);
  std::printf("log P* batch      %.10f\n", evidence);
  std::printf("log P* sequential %.10f\n", log_prob);
  auto p = state.predictive();
  std::printf("next-symbol law (%.4f, %.4f)\n", p[0], p[1]);
  return 0;
}
