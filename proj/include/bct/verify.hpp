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
// File: verify.hpp
// -----------------------------------------------------------------------------
//
// Verification harness: exhaustive-enumeration oracles, Monte-Carlo oracles,
// hard bound checks and seeded simulation suites. Each check returns a
// CheckResult with a machine-readable detail block and, on failure, the
// first witness instance.

#ifndef BCT_VERIFY_HPP_
#define BCT_VERIFY_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bct/chain.hpp"
#include "bct/common.hpp"
#include "bct/context_tree.hpp"
#include "bct/counting.hpp"
#include "bct/ctw.hpp"
#include "bct/estimator.hpp"
#include "bct/inference.hpp"
#include "bct/io.hpp"
#include "bct/parallel.hpp"
#include "bct/theory.hpp"

namespace bct {

/// Thresholds for the statistical suites. The limits behind them are
/// asymptotic, so these are configuration rather than derived constants.
struct VerifyThresholds {
  double recovery_fraction = 0.95;
  double posterior_mass = 0.9;
  double predictive_deviation = 0.02;
  double zeta = 0.02;
  double normality_relative = 0.10;
  double posterior_mean_error = 0.01;
  double smbt_gap = 0.005;
  double eval_seconds = 10.0;
};

struct VerifyOptions {
  std::uint64_t seed = 0x5EED5EEDULL;
  bool quick = false;
  /// Deliberate fault: the mixture side of the oracle check reads beta as
  /// 1 - beta. Used to confirm the harness catches real bugs.
  bool inject_beta_flip = false;
  VerifyThresholds thresholds;
};

struct CheckResult {
  std::string id;
  std::string name;
  bool hard = true;  // exact/bound assertion rather than a statistical trend
  bool passed = true;
  double seconds = 0.0;
  Json detail = Json::object();
  Json witness = nullptr;
};

inline Json to_json(const CheckResult& c) {
  return Json{{"id", c.id},          {"name", c.name},     {"hard", c.hard},
              {"passed", c.passed},  {"seconds", c.seconds}, {"detail", c.detail},
              {"witness", c.witness}};
}

namespace verify_detail {

inline bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(1.0, std::abs(b));
}

inline Json sequence_json(const SymbolSequence& s) {
  return Json{{"context", s.context}, {"body", s.body}};
}

/// Random proper tree of depth <= max_depth; each node above the depth
/// limit splits with probability `split`.
template <class Rng>
ContextTree random_tree(std::size_t m, std::size_t max_depth, double split, Rng& rng) {
  ContextTree t(m);
  std::bernoulli_distribution coin(split);
  std::vector<Context> frontier{{}};
  while (!frontier.empty()) {
    Context s = frontier.back();
    frontier.pop_back();
    if (s.size() >= max_depth || !coin(rng)) continue;
    t.split(s);
    for (Symbol j = 0; j < m; ++j) {
      Context sj = s;
      sj.push_back(j);
      frontier.push_back(std::move(sj));
    }
  }
  return t;
}

template <class Rng>
std::vector<double> random_simplex(std::size_t m, double shape, Rng& rng) {
  std::gamma_distribution<double> g(shape, 1.0);
  std::vector<double> p(m);
  double sum = 0.0;
  for (double& x : p) {
    x = g(rng) + 1e-300;
    sum += x;
  }
  for (double& x : p) x /= sum;
  // Force an exact unit sum so validation at 1e-12 never trips on rounding.
  double rest = 1.0;
  for (std::size_t j = 0; j + 1 < m; ++j) rest -= p[j];
  p[m - 1] = std::max(0.0, rest);
  return p;
}

template <class Rng>
ChainSpec random_chain(std::size_t m, std::size_t max_depth, Rng& rng,
                       double split = 0.5, double shape = 1.0) {
  ChainSpec spec;
  spec.m = m;
  spec.depth = max_depth;
  spec.tree = random_tree(m, max_depth, split, rng);
  for (const Context& s : spec.tree.leaves()) {
    spec.theta.theta[s] = random_simplex(m, shape, rng);
  }
  return spec;
}

template <class Rng>
std::vector<Symbol> random_symbols(std::size_t m, std::size_t n, Rng& rng) {
  std::uniform_int_distribution<Symbol> pick(0, static_cast<Symbol>(m - 1));
  std::vector<Symbol> out(n);
  for (auto& x : out) x = pick(rng);
  return out;
}

struct Instance {
  std::size_t m = 2;
  std::size_t depth = 0;
  double beta = 0.5;
  SymbolSequence seq;

  Json json() const {
    return Json{{"m", m}, {"D", depth}, {"beta", beta}, {"sequence", sequence_json(seq)}};
  }
};

/// The shared pool of small random instances: m = 2, D <= 3, n <= 100,
/// beta cycling through {0.3, 0.5, 0.7}; half i.i.d. uniform data, half
/// drawn from a random tree source.
inline std::vector<Instance> small_instances(std::uint64_t seed, std::size_t count) {
  static constexpr double kBetas[] = {0.3, 0.5, 0.7};
  std::vector<Instance> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    Instance inst;
    inst.m = 2;
    inst.depth = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
    inst.beta = kBetas[i % 3];
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 100)(rng);
    inst.seq.context = random_symbols(inst.m, inst.depth, rng);
    if (i % 2 == 0) {
      inst.seq.body = random_symbols(inst.m, n, rng);
    } else {
      ChainSpec spec = random_chain(inst.m, inst.depth, rng, 0.6, 0.5);
      inst.seq = generate(spec, n, inst.seq.context, rng);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

/// log sum_T exp(prior + marginal) by exhaustive enumeration.
inline double brute_force_mix_log(const std::vector<ContextTree>& models,
                                  const CountTrie& trie, double beta) {
  double acc = kNegInf;
  for (const auto& t : models) {
    acc = log_add(acc, prior_log(t, trie.max_depth(), beta) + marginal_log(t, trie));
  }
  return acc;
}

/// The depth-1 binary chain theta_0 = (0.9, 0.1), theta_1 = (0.2, 0.8)
/// embedded at memory D.
inline ChainSpec reference_chain(std::size_t max_depth = 5) {
  ChainSpec spec;
  spec.m = 2;
  spec.depth = max_depth;
  spec.tree = ContextTree::complete(2, 1);
  spec.theta = ParameterVector::from_rows(spec.tree, {{0.9, 0.1}, {0.2, 0.8}});
  return spec;
}

inline ChainSpec fair_coin(std::size_t max_depth = 1) {
  ChainSpec spec;
  spec.m = 2;
  spec.depth = max_depth;
  spec.tree = ContextTree(2);
  spec.theta = ParameterVector::from_rows(spec.tree, {{0.5, 0.5}});
  return spec;
}

template <class Fn>
CheckResult timed(std::string id, std::string name, bool hard, Fn&& body) {
  CheckResult r;
  r.id = std::move(id);
  r.name = std::move(name);
  r.hard = hard;
  auto start = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail["exception"] = e.what();
  }
  r.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace verify_detail

/// Sum of exp(prior_log) over the full model class equals one.
inline CheckResult check_prior_normalization(const VerifyOptions& opt) {
  (void)opt;
  return verify_detail::timed("prior_normalization", "model prior sums to one", true,
                              [&](CheckResult& r) {
    struct Case {
      std::size_t m, depth;
    };
    const Case cases[] = {{2, 0}, {2, 1}, {2, 2}, {2, 3}, {2, 4}, {3, 1}, {3, 2}};
    double worst = 0.0;
    std::size_t evaluated = 0;
    for (const Case& c : cases) {
      auto models = enumerate_models(c.m, c.depth);
      for (double beta : {0.3, 0.5, 0.7}) {
        double acc = kNegInf;
        for (const auto& t : models) acc = log_add(acc, prior_log(t, c.depth, beta));
        const double err = std::abs(std::exp(acc) - 1.0);
        worst = std::max(worst, err);
        ++evaluated;
        if (err > 1e-10 && r.passed) {
          r.passed = false;
          r.witness = Json{{"m", c.m}, {"D", c.depth}, {"beta", beta}, {"sum", std::exp(acc)}};
        }
      }
    }
    r.detail = Json{{"cases", evaluated}, {"max_abs_error", worst}, {"tolerance", 1e-10}};
  });
}

/// CTW root probability equals the enumerated mixture over all models.
inline CheckResult check_ctw_oracle(const VerifyOptions& opt) {
  return verify_detail::timed("ctw_oracle", "CTW equals enumerated mixture", true,
                              [&](CheckResult& r) {
    const std::size_t count = opt.quick ? 100 : 500;
    auto instances = verify_detail::small_instances(opt.seed, count);
    double worst = 0.0;
    std::vector<std::vector<ContextTree>> models(4);
    for (std::size_t d = 0; d < 4; ++d) models[d] = enumerate_models(2, d);
    for (const auto& inst : instances) {
      CountTrie trie = build_counts(inst.seq, inst.m, inst.depth);
      const double beta_used = opt.inject_beta_flip ? 1.0 - inst.beta : inst.beta;
      const double ctw = ctw_mix_log(trie, beta_used);
      const double brute = verify_detail::brute_force_mix_log(models[inst.depth], trie,
                                                              inst.beta);
      const double rel = std::abs(ctw - brute) / std::max(1.0, std::abs(brute));
      worst = std::max(worst, rel);
      if (rel > 1e-10 && r.passed) {
        r.passed = false;
        r.witness = inst.json();
        r.witness["ctw"] = ctw;
        r.witness["enumerated"] = brute;
      }
    }
    r.detail = Json{{"instances", count},
                    {"max_relative_error", worst},
                    {"tolerance", 1e-10},
                    {"injected_fault", opt.inject_beta_flip}};
  });
}

/// Predictive laws sum to one along every visited state, and the mixture
/// sums to one over all binary strings of length <= 8.
inline CheckResult check_predictive_normalization(const VerifyOptions& opt) {
  return verify_detail::timed("predictive_normalization",
                              "predictive and string-sum normalization", true,
                              [&](CheckResult& r) {
    const std::size_t count = opt.quick ? 100 : 500;
    auto instances = verify_detail::small_instances(opt.seed, count);
    double worst_pred = 0.0;
    std::size_t states = 0;
    for (const auto& inst : instances) {
      CtwState st(inst.m, inst.depth, inst.beta, inst.seq.context);
      for (std::size_t i = 0; i <= inst.seq.body.size(); ++i) {
        auto p = st.predictive();
        double sum = 0.0;
        for (double x : p) sum += x;
        worst_pred = std::max(worst_pred, std::abs(sum - 1.0));
        ++states;
        if (std::abs(sum - 1.0) > 1e-10 && r.passed) {
          r.passed = false;
          r.witness = inst.json();
          r.witness["step"] = i;
          r.witness["sum"] = sum;
        }
        if (i < inst.seq.body.size()) st.update(inst.seq.body[i]);
      }
    }
    double worst_sum = 0.0;
    std::size_t sums = 0;
    const std::size_t max_n = opt.quick ? 6 : 8;
    for (std::size_t depth = 0; depth <= 2; ++depth) {
      for (double beta : {0.3, 0.5, 0.7}) {
        for (std::size_t n = 1; n <= max_n; ++n) {
          std::vector<Symbol> context(depth, 0);
          if (depth == 2) context = {1, 0};
          double acc = kNegInf;
          for (std::size_t code = 0; code < (std::size_t{1} << n); ++code) {
            SymbolSequence seq{context, {}};
            for (std::size_t k = 0; k < n; ++k) seq.body.push_back((code >> k) & 1);
            acc = log_add(acc, ctw_mix_log(build_counts(seq, 2, depth), beta));
          }
          const double err = std::abs(std::exp(acc) - 1.0);
          worst_sum = std::max(worst_sum, err);
          ++sums;
          if (err > 1e-10 && r.passed) {
            r.passed = false;
            r.witness = Json{{"D", depth}, {"beta", beta}, {"n", n}, {"sum", std::exp(acc)}};
          }
        }
      }
    }
    r.detail = Json{{"states_checked", states},
                    {"max_predictive_error", worst_pred},
                    {"string_sums", sums},
                    {"max_string_sum_error", worst_sum},
                    {"tolerance", 1e-10}};
  });
}

/// Streaming updates agree node by node with batch recomputation.
inline CheckResult check_sequential_batch(const VerifyOptions& opt) {
  return verify_detail::timed("sequential_batch", "sequential equals batch per node", true,
                              [&](CheckResult& r) {
    const std::size_t count = opt.quick ? 30 : 100;
    static constexpr double kBetas[] = {0.3, 0.5, 0.7};
    double worst = 0.0;
    std::size_t nodes = 0;
    for (std::size_t i = 0; i < count; ++i) {
      std::mt19937_64 rng(derive_seed(opt.seed ^ 0xB47C4ULL, i));
      const std::size_t m = 2 + (i % 2);
      const std::size_t depth = std::uniform_int_distribution<std::size_t>(0, 5)(rng);
      const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 500)(rng);
      const double beta = kBetas[i % 3];
      SymbolSequence seq;
      seq.context = verify_detail::random_symbols(m, depth, rng);
      ChainSpec spec = verify_detail::random_chain(m, depth, rng, 0.5, 0.7);
      seq = generate(spec, n, seq.context, rng);
      CtwState st(m, depth, beta, seq.context);
      for (Symbol x : seq.body) st.update(x);
      CountTrie batch = build_counts(seq, m, depth);
      auto pw = ctw_node_log_pw(batch, beta);
      // Paired walk over both tries.
      std::vector<std::pair<CountTrie::NodeId, CountTrie::NodeId>> stack{{0, 0}};
      const CountTrie& live = st.trie();
      while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        if ((a == CountTrie::kAbsent) != (b == CountTrie::kAbsent)) {
          r.passed = false;
          r.detail["structure_mismatch"] = true;
          continue;
        }
        if (a == CountTrie::kAbsent) continue;
        ++nodes;
        const double pe_batch = pe_log(batch.counts(b));
        const double e1 = std::abs(st.log_pe(a) - pe_batch) / std::max(1.0, std::abs(pe_batch));
        const double e2 = std::abs(st.log_pw(a) - pw[b]) / std::max(1.0, std::abs(pw[b]));
        worst = std::max({worst, e1, e2});
        if (std::max(e1, e2) > 1e-10 && r.passed) {
          r.passed = false;
          r.witness = Json{{"m", m}, {"D", depth}, {"beta", beta},
                           {"sequence", verify_detail::sequence_json(seq)}};
        }
        for (Symbol j = 0; j < m; ++j) stack.emplace_back(live.child(a, j), batch.child(b, j));
      }
    }
    r.detail = Json{{"strings", count},
                    {"nodes_compared", nodes},
                    {"max_relative_error", worst},
                    {"tolerance", 1e-10}};
  });
}

/// lower <= log P_e(a) <= upper on random count vectors.
inline CheckResult check_kt_bounds(const VerifyOptions& opt) {
  return verify_detail::timed("kt_bounds", "KT estimator sandwich bounds", true,
                              [&](CheckResult& r) {
    const std::size_t count = 1000;
    std::mt19937_64 rng(derive_seed(opt.seed, 0x4B54ULL));
    double min_lower_slack = INFINITY;
    double min_upper_slack = INFINITY;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t m = 2 + i % 5;
      // Log-uniform total in [1, 1e4].
      const double u = std::uniform_real_distribution<double>(0.0, 4.0)(rng);
      const Count total = std::max<Count>(1, static_cast<Count>(std::pow(10.0, u)));
      std::vector<Count> a(m, 0);
      if (i % 10 == 0) {
        a[rng() % m] = total;
      } else {
        auto p = verify_detail::random_simplex(m, 0.5, rng);
        std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
        for (Count k = 0; k < total; ++k) ++a[pick(rng)];
      }
      const double pe = pe_log(a);
      const PeBounds b = pe_bounds(a);
      // Exact equality occurs (e.g. a = (1,0)); allow rounding only.
      const double tol = 1e-12 * std::max(1.0, std::abs(pe));
      min_lower_slack = std::min(min_lower_slack, pe - b.lower);
      min_upper_slack = std::min(min_upper_slack, b.upper - pe);
      if ((pe < b.lower - tol || pe > b.upper + tol) && r.passed) {
        r.passed = false;
        r.witness = Json{{"counts", a}, {"lower", b.lower}, {"pe_log", pe}, {"upper", b.upper}};
      }
    }
    r.detail = Json{{"vectors", count},
                    {"min_lower_slack", min_lower_slack},
                    {"min_upper_slack", min_upper_slack}};
  });
}

/// Regret lower bounds (the per-leaf count form and the O(log n) form) hold on
/// simulated data, and the per-leaf constant gap equals Delta_m.
inline CheckResult check_regret_bounds(const VerifyOptions& opt) {
  return verify_detail::timed("regret_bounds", "redundancy bounds and Delta_m", true,
                              [&](CheckResult& r) {
    const std::size_t count = opt.quick ? 200 : 1000;
    static constexpr double kBetas[] = {0.3, 0.5, 0.7};
    double min_count = INFINITY;
    double min_log_n = INFINITY;
    std::size_t log_n_cases = 0;
    for (std::size_t i = 0; i < count; ++i) {
      std::mt19937_64 rng(derive_seed(opt.seed ^ 0x4E6E7ULL, i));
      const std::size_t m = 2 + i % 2;
      const std::size_t depth = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 2000)(rng);
      const double beta = kBetas[i % 3];
      ChainSpec spec = verify_detail::random_chain(m, depth, rng, 0.6, 1.0);
      auto ctx = verify_detail::random_symbols(m, depth, rng);
      SymbolSequence seq = generate(spec, n, ctx, rng);
      RegretReport rep = regret_report(seq, spec.tree, spec.theta, beta);
      const double scale = std::max(1.0, std::abs(rep.log_likelihood));
      min_count = std::min(min_count, rep.count_slack);
      bool ok = rep.count_slack >= -1e-10 * scale;
      if (rep.log_n_applicable) {
        ++log_n_cases;
        min_log_n = std::min(min_log_n, rep.log_n_slack);
        ok = ok && rep.log_n_slack >= -1e-10 * scale;
      }
      if (!ok && r.passed) {
        r.passed = false;
        r.witness = Json{{"m", m}, {"D", depth}, {"beta", beta},
                         {"chain", to_json(spec)}, {"report", to_json(rep)},
                         {"sequence", verify_detail::sequence_json(seq)}};
      }
    }
    double worst_delta = 0.0;
    for (std::size_t m = 2; m <= 16; ++m) {
      const double gap = ctw_leaf_constant(m) - minimax_leaf_constant(m);
      const double err = std::abs(gap - delta_m(m));
      worst_delta = std::max(worst_delta, err);
      if ((err > 1e-12 || !(delta_m(m) > 0.0)) && r.passed) {
        r.passed = false;
        r.witness = Json{{"m", m}, {"gap", gap}, {"delta_m", delta_m(m)}};
      }
    }
    r.detail = Json{{"instances", count},
                    {"min_count_slack", min_count},
                    {"log_n_instances", log_n_cases},
                    {"min_log_n_slack", min_log_n},
                    {"max_delta_m_error", worst_delta},
                    {"delta_2", delta_m(2)}};
  });
}

/// MAP recursion equals the enumerated argmax whenever it is unique by a
/// margin above 1e-9.
inline CheckResult check_map_oracle(const VerifyOptions& opt) {
  return verify_detail::timed("map_oracle", "MAP tree equals enumerated argmax", true,
                              [&](CheckResult& r) {
    const std::size_t count = opt.quick ? 100 : 500;
    auto instances = verify_detail::small_instances(opt.seed ^ 0x3A9ULL, count);
    std::vector<std::vector<ContextTree>> models(4);
    for (std::size_t d = 0; d < 4; ++d) models[d] = enumerate_models(2, d);
    std::size_t compared = 0;
    std::size_t near_ties = 0;
    for (const auto& inst : instances) {
      CountTrie trie = build_counts(inst.seq, inst.m, inst.depth);
      double best = kNegInf;
      double second = kNegInf;
      const ContextTree* arg = nullptr;
      for (const auto& t : models[inst.depth]) {
        const double v = prior_log(t, inst.depth, inst.beta) + marginal_log(t, trie);
        if (v > best) {
          second = best;
          best = v;
          arg = &t;
        } else if (v > second) {
          second = v;
        }
      }
      if (best - second <= 1e-9) {
        ++near_ties;
        continue;
      }
      ++compared;
      MapResult got = map_tree(trie, inst.beta);
      const bool ok = got.tree == *arg &&
                      verify_detail::close(got.log_posterior_unnorm, best, 1e-10);
      if (!ok && r.passed) {
        r.passed = false;
        r.witness = inst.json();
        r.witness["map_tree"] = got.tree.to_string();
        r.witness["enumerated_argmax"] = arg->to_string();
      }
    }
    r.detail = Json{{"instances", count}, {"compared", compared}, {"near_ties_skipped", near_ties}};
  });
}

/// Closed-form marginal likelihood against a prior-sampled Monte-Carlo
/// average of the likelihood.
inline CheckResult check_marginal_monte_carlo(const VerifyOptions& opt) {
  return verify_detail::timed("marginal_monte_carlo",
                              "marginal likelihood matches prior Monte Carlo", true,
                              [&](CheckResult& r) {
    const std::size_t instances = opt.quick ? 5 : 20;
    const std::size_t draws = opt.quick ? 100000 : 1000000;
    std::vector<Json> cases(instances);
    std::vector<double> zs(instances, 0.0);
    std::vector<Json> sequences(instances);
    parallel_for(instances, [&](std::size_t i) {
      std::mt19937_64 rng(derive_seed(opt.seed ^ 0x1E3AULL, i));
      const std::size_t m = 2 + i % 2;
      const std::size_t depth = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
      ContextTree tree = verify_detail::random_tree(m, depth, 0.6, rng);
      SymbolSequence seq;
      seq.context = verify_detail::random_symbols(m, depth, rng);
      seq.body = verify_detail::random_symbols(m, n, rng);
      CountTrie trie = build_counts(seq, m, depth);
      const double exact = std::exp(marginal_log(tree, trie));
      // Prior Dir(1/2,...,1/2) on every leaf; leaves without counts
      // contribute a factor of one and are not sampled.
      std::vector<std::vector<Count>> observed;
      for (const Context& s : tree.leaves()) {
        auto a = trie.counts_at(s);
        if (std::any_of(a.begin(), a.end(), [](Count c) { return c > 0; })) {
          observed.push_back(std::move(a));
        }
      }
      std::gamma_distribution<double> gamma(0.5, 1.0);
      std::vector<double> g(m);
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::size_t k = 0; k < draws; ++k) {
        double lik = 0.0;
        for (const auto& a : observed) {
          double total = 0.0;
          for (std::size_t j = 0; j < m; ++j) total += (g[j] = gamma(rng));
          for (std::size_t j = 0; j < m; ++j) {
            if (a[j] > 0) lik += double(a[j]) * std::log(g[j] / total);
          }
        }
        const double v = std::exp(lik);
        sum += v;
        sum_sq += v * v;
      }
      const double mean = sum / double(draws);
      const double var = std::max(0.0, sum_sq / double(draws) - mean * mean);
      const double se = std::sqrt(var / double(draws));
      zs[i] = se > 0 ? std::abs(mean - exact) / se : 0.0;
      cases[i] = Json{{"m", m}, {"D", depth}, {"n", n}, {"tree", tree.to_string()},
                      {"exact", exact}, {"monte_carlo", mean}, {"std_error", se},
                      {"z", zs[i]}};
      sequences[i] = verify_detail::sequence_json(seq);
    });
    double worst_z = 0.0;
    for (std::size_t i = 0; i < instances; ++i) {
      worst_z = std::max(worst_z, zs[i]);
      if (zs[i] > 3.0 && r.passed) {
        r.passed = false;
        r.witness = cases[i];
        r.witness["sequence"] = sequences[i];
      }
    }
    r.detail = Json{{"instances", instances}, {"draws", draws}, {"max_z", worst_z},
                    {"cases", Json(cases)}};
  });
}

/// MAP recovery and posterior concentration on the reference depth-1 chain.
inline CheckResult check_consistency(const VerifyOptions& opt) {
  return verify_detail::timed("consistency", "MAP and posterior consistency trend", false,
                              [&](CheckResult& r) {
    ChainSpec spec = verify_detail::reference_chain(5);
    ConsistencyReport rep =
        consistency_suite(spec, 0.5, {1000, 10000, 50000}, 100, opt.seed);
    const auto& last = rep.points.back();
    const auto& th = opt.thresholds;
    r.passed = last.recovery_fraction >= th.recovery_fraction &&
               last.mean_posterior >= th.posterior_mass && rep.recovery_nondecreasing &&
               rep.posterior_nondecreasing;
    r.detail = to_json(rep);
  });
}

/// Predictive law converges to the true conditional and zeta vanishes at
/// internal nodes of the true tree.
inline CheckResult check_predictive_convergence(const VerifyOptions& opt) {
  return verify_detail::timed("predictive_convergence",
                              "predictive convergence and vanishing zeta", false,
                              [&](CheckResult& r) {
    ChainSpec spec = verify_detail::reference_chain(5);
    PredictiveReport rep = predictive_suite(spec, 0.5, 100000, 20, opt.seed ^ 0x9D1ULL);
    double zmax = 0.0;
    for (const auto& z : rep.zeta) zmax = std::max(zmax, z.max);
    const auto& th = opt.thresholds;
    r.passed = rep.mean_max_deviation < th.predictive_deviation && zmax < th.zeta;
    r.detail = to_json(rep);
    r.detail["max_zeta"] = zmax;
  });
}

/// n times the posterior covariance approaches the Fisher blocks J_s.
inline CheckResult check_normality(const VerifyOptions& opt) {
  return verify_detail::timed("normality", "posterior variance matches J", false,
                              [&](CheckResult& r) {
    const std::size_t n = 100000;
    Json cases = Json::array();
    const auto& th = opt.thresholds;
    std::size_t idx = 0;
    for (ChainSpec spec : {verify_detail::reference_chain(5), verify_detail::fair_coin(1)}) {
      StationaryDistribution pi = stationary(spec);
      std::mt19937_64 rng(derive_seed(opt.seed ^ 0x4F524DULL, idx++));
      auto ctx = draw_stationary_context(pi, rng);
      SymbolSequence seq = generate(spec, n, ctx, rng);
      CountTrie trie = build_counts(seq, spec.m, spec.depth);
      auto blocks = fisher_blocks(spec.theta, leaf_masses(spec.tree, pi));
      NormalityReport rep = normality_check(trie, spec.tree, blocks, n);
      Json c = to_json(rep);
      c["tree"] = spec.tree.to_string();
      cases.push_back(c);
      if (rep.max_relative_deviation_diagonal > th.normality_relative ||
          rep.max_mean_error > th.posterior_mean_error || !rep.offdiagonal_signs_match) {
        r.passed = false;
      }
    }
    r.detail = Json{{"cases", cases}};
  });
}

/// -log P(x|T)/n approaches the entropy-rate functional for several T, and
/// the true tree has strictly smaller rate than the root-only model.
inline CheckResult check_entropy_rate(const VerifyOptions& opt) {
  return verify_detail::timed("entropy_rate", "normalized marginal likelihood limit", false,
                              [&](CheckResult& r) {
    ChainSpec spec = verify_detail::reference_chain(5);
    const std::size_t n = 100000;
    const std::uint64_t seed = derive_seed(opt.seed, 0x5B7ULL);
    Json cases = Json::array();
    double star_rate = 0.0;
    double root_rate = 0.0;
    double star_h = 0.0;
    double root_h = 0.0;
    for (const ContextTree& t :
         {spec.tree, ContextTree(2), ContextTree::complete(2, 2)}) {
      SmbtReport rep = smbt_check(spec, t, n, seed);
      cases.push_back(to_json(rep));
      if (std::abs(rep.gap) >= opt.thresholds.smbt_gap) r.passed = false;
      if (t == spec.tree) {
        star_rate = rep.normalized_neg_log_marginal;
        star_h = rep.entropy_rate;
      }
      if (t.leaf_count() == 1) {
        root_rate = rep.normalized_neg_log_marginal;
        root_h = rep.entropy_rate;
      }
    }
    const bool ordered = star_rate < root_rate && star_h < root_h;
    if (!ordered) r.passed = false;
    r.detail = Json{{"cases", cases}, {"strict_ordering_reproduced", ordered}};
  });
}

/// Sequential evaluation of 10^6 binary symbols at depth 20, in-process.
inline CheckResult check_throughput(const VerifyOptions& opt) {
  return verify_detail::timed("throughput", "sequential evaluation speed", false,
                              [&](CheckResult& r) {
    const std::size_t n = 1000000;
    const std::size_t depth = 20;
    std::mt19937_64 rng(derive_seed(opt.seed, 0x7E5ULL));
    // Uniform bits: the worst case for the number of distinct contexts.
    SymbolSequence seq{verify_detail::random_symbols(2, depth, rng),
                       verify_detail::random_symbols(2, n, rng)};
    auto start = std::chrono::steady_clock::now();
    CtwState st(2, depth, 0.5, seq.context);
    double loss = 0.0;
    for (Symbol x : seq.body) loss -= st.update(x);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::size_t nodes = st.trie().node_count();
    r.passed = secs < opt.thresholds.eval_seconds && nodes <= n * (depth + 1) + 1;
    r.detail = Json{{"n", n},
                    {"D", depth},
                    {"seconds", secs},
                    {"total_log_loss", loss},
                    {"trie_nodes", nodes},
                    {"complete_tree_nodes", (std::size_t{1} << (depth + 1)) - 1}};
  });
}

/// Runs every check (hard assertions only under `quick`).
inline std::vector<CheckResult> run_verification(const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  out.push_back(check_prior_normalization(opt));
  out.push_back(check_ctw_oracle(opt));
  out.push_back(check_predictive_normalization(opt));
  out.push_back(check_sequential_batch(opt));
  out.push_back(check_kt_bounds(opt));
  out.push_back(check_regret_bounds(opt));
  out.push_back(check_map_oracle(opt));
  out.push_back(check_marginal_monte_carlo(opt));
  if (!opt.quick) {
    out.push_back(check_consistency(opt));
    out.push_back(check_predictive_convergence(opt));
    out.push_back(check_normality(opt));
    out.push_back(check_entropy_rate(opt));
    out.push_back(check_throughput(opt));
  }
  return out;
}

}  // namespace bct

#endif  // BCT_VERIFY_HPP_
