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

// bct: command-line front end.
//
//   bct fit      -m M -D D --beta B [--context peel|SYMS] INPUT
//   bct eval     -m M -D D --beta B [--context ...] [--check-batch] INPUT
//   bct predict  -m M -D D --beta B [--context ...] --per-symbol CSV INPUT
//   bct simulate --spec SPEC.json -n N --seed S [--require-ergodic]
//   bct verify   [--seed S] [--quick] [--inject-bug] [--threshold k=v]...
//
// Exit codes: 0 ok, 1 invalid configuration, 2 input parse failure,
// 3 non-ergodic chain under --require-ergodic, 4 hard-assertion failure,
// 5 statistical-suite failure only.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bct/bct.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kInvalidConfig = 1,
  kParseFailure = 2,
  kNotErgodic = 3,
  kHardFailure = 4,
  kSoftFailure = 5,
};

struct RunConfig {
  std::string input;
  std::size_t m = 2;
  std::size_t depth = 0;
  double beta = 0.5;
  std::string context = "peel";
  std::uint64_t seed = 0x5EED5EEDULL;
  std::string out;
  std::string per_symbol;
  bool check_batch = false;
  // simulate
  std::string spec_path;
  std::size_t n = 0;
  bool require_ergodic = false;
  // verify
  bool quick = false;
  bool inject_bug = false;
  std::vector<std::string> thresholds;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void emit(const bct::Json& doc, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream f(out);
  if (!f) throw bct::InputError("cannot open output file " + out);
  f << doc.dump(2) << "\n";
}

void validate_common(const RunConfig& cfg) {
  bct::check_alphabet(cfg.m);
  bct::check_beta(cfg.beta);
}

/// Reads the input file and splits it into initial context and body.
bct::SymbolSequence load_sequence(const RunConfig& cfg) {
  std::ifstream f(cfg.input);
  if (!f) throw bct::InputError("cannot read input file " + cfg.input);
  std::vector<bct::Symbol> xs = bct::read_symbols(f, cfg.m);
  bct::SymbolSequence seq;
  if (cfg.context == "peel") {
    if (xs.size() < cfg.depth) {
      throw bct::InputError("input has " + std::to_string(xs.size()) +
                            " symbols, fewer than the depth " +
                            std::to_string(cfg.depth) + " needed as initial context");
    }
    seq.context.assign(xs.begin(), xs.begin() + cfg.depth);
    seq.body.assign(xs.begin() + cfg.depth, xs.end());
  } else {
    seq.context = bct::parse_context_argument(cfg.context, cfg.m);
    if (seq.context.size() != cfg.depth) {
      throw bct::InputError("--context has " + std::to_string(seq.context.size()) +
                            " symbols; depth is " + std::to_string(cfg.depth));
    }
    seq.body = std::move(xs);
  }
  return seq;
}

int cmd_fit(const RunConfig& cfg) {
  validate_common(cfg);
  auto start = Clock::now();
  bct::SymbolSequence seq = load_sequence(cfg);
  bct::CountTrie trie = bct::build_counts(seq, cfg.m, cfg.depth);
  bct::MapResult map = bct::map_tree(trie, cfg.beta);
  const double evidence = bct::ctw_mix_log(trie, cfg.beta);
  auto post = bct::full_conditional(trie, map.tree);
  auto moments = bct::posterior_moments(post);
  bct::Json leaves = bct::Json::array();
  for (const bct::Context& s : map.tree.leaves()) {
    leaves.push_back(bct::Json{{"context", bct::context_to_string(s, cfg.m)},
                               {"counts", trie.counts_at(s)},
                               {"dirichlet_alpha", post.alpha.at(s)},
                               {"posterior_mean", moments.mean.at(s)},
                               {"posterior_variance", moments.variance.at(s)}});
  }
  const double log_post = map.log_posterior_unnorm - evidence;
  bct::Json doc{
      {"command", "fit"},
      {"m", cfg.m},
      {"D", cfg.depth},
      {"beta", cfg.beta},
      {"n", seq.body.size()},
      {"map_tree", map.tree.to_string()},
      {"map_log_posterior", log_post},
      {"map_posterior", std::exp(log_post)},
      {"log_evidence", evidence},
      {"root_only_posterior",
       std::exp(bct::model_posterior_log(bct::ContextTree(cfg.m), trie, cfg.beta))},
      {"leaves", leaves},
      {"trie_nodes", trie.node_count()},
      {"seconds", seconds_since(start)}};
  emit(doc, cfg.out);
  return kOk;
}

int cmd_eval(const RunConfig& cfg, bool per_symbol) {
  validate_common(cfg);
  auto start = Clock::now();
  bct::SymbolSequence seq = load_sequence(cfg);
  const double load_secs = seconds_since(start);
  std::ofstream csv;
  if (per_symbol) {
    if (cfg.per_symbol.empty()) throw bct::InputError("predict needs --per-symbol PATH");
    csv.open(cfg.per_symbol);
    if (!csv) throw bct::InputError("cannot open " + cfg.per_symbol);
    csv.precision(17);
    csv << "index,symbol,log_loss";
    for (std::size_t j = 0; j < cfg.m; ++j) csv << ",p" << j;
    csv << "\n";
  }
  auto eval_start = Clock::now();
  bct::CtwState state(cfg.m, cfg.depth, cfg.beta, seq.context);
  double loss = 0.0;
  for (std::size_t i = 0; i < seq.body.size(); ++i) {
    if (per_symbol) {
      auto p = state.predictive();
      const double step = -state.update(seq.body[i]);
      loss += step;
      csv << i << "," << seq.body[i] << "," << step;
      for (double x : p) csv << "," << x;
      csv << "\n";
    } else {
      loss -= state.update(seq.body[i]);
    }
  }
  const double eval_secs = seconds_since(eval_start);
  bct::Json doc{{"command", per_symbol ? "predict" : "eval"},
                {"m", cfg.m},
                {"D", cfg.depth},
                {"beta", cfg.beta},
                {"n", seq.body.size()},
                {"total_log_loss", loss},
                {"total_log_loss_bits", loss / std::log(2.0)},
                {"mean_log_loss", seq.body.empty() ? 0.0 : loss / double(seq.body.size())},
                {"trie_nodes", state.trie().node_count()},
                {"load_seconds", load_secs},
                {"eval_seconds", eval_secs}};
  if (cfg.check_batch) {
    const double batch = -bct::ctw_mix_log(bct::build_counts(seq, cfg.m, cfg.depth), cfg.beta);
    doc["batch_log_loss"] = batch;
    doc["batch_difference"] = loss - batch;
  }
  doc["seconds"] = seconds_since(start);
  emit(doc, cfg.out);
  return kOk;
}

int cmd_simulate(const RunConfig& cfg) {
  std::ifstream f(cfg.spec_path);
  if (!f) throw bct::InputError("cannot read spec file " + cfg.spec_path);
  bct::ChainSpec spec = bct::read_chain_spec(f);
  std::mt19937_64 rng(bct::derive_seed(cfg.seed, 0));

  bool ergodic = false;
  bool checked = false;
  try {
    ergodic = bct::check_ergodicity(spec).ergodic();
    checked = true;
  } catch (const bct::CapacityError&) {
    if (cfg.require_ergodic) throw;
  }
  if (cfg.require_ergodic && !ergodic) {
    std::cerr << "bct: chain is not ergodic (irreducible and aperiodic)\n";
    return kNotErgodic;
  }

  std::vector<bct::Symbol> context;
  if (cfg.context != "peel") {
    context = bct::parse_context_argument(cfg.context, spec.m);
  } else if (checked && ergodic) {
    context = bct::draw_stationary_context(bct::stationary(spec), rng);
  } else {
    context.assign(spec.depth, 0);
  }
  bct::SymbolSequence seq = bct::generate(spec, cfg.n, context, rng);
  std::vector<bct::Symbol> all = seq.context;
  all.insert(all.end(), seq.body.begin(), seq.body.end());
  if (cfg.out.empty() || cfg.out == "-") {
    bct::write_symbols(std::cout, all);
  } else {
    std::ofstream o(cfg.out);
    if (!o) throw bct::InputError("cannot open output file " + cfg.out);
    bct::write_symbols(o, all);
  }
  return kOk;
}

void apply_threshold(bct::VerifyThresholds& th, const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos) throw bct::InputError("--threshold expects key=value");
  const std::string key = kv.substr(0, eq);
  double value = 0.0;
  try {
    value = std::stod(kv.substr(eq + 1));
  } catch (...) {
    throw bct::InputError("--threshold value is not a number: " + kv);
  }
  const std::map<std::string, double*> slots{
      {"recovery_fraction", &th.recovery_fraction},
      {"posterior_mass", &th.posterior_mass},
      {"predictive_deviation", &th.predictive_deviation},
      {"zeta", &th.zeta},
      {"normality_relative", &th.normality_relative},
      {"posterior_mean_error", &th.posterior_mean_error},
      {"smbt_gap", &th.smbt_gap},
      {"eval_seconds", &th.eval_seconds}};
  auto it = slots.find(key);
  if (it == slots.end()) throw bct::InputError("unknown threshold '" + key + "'");
  *it->second = value;
}

int cmd_verify(const RunConfig& cfg) {
  bct::VerifyOptions opt;
  opt.seed = cfg.seed;
  opt.quick = cfg.quick;
  opt.inject_beta_flip = cfg.inject_bug;
  for (const auto& kv : cfg.thresholds) apply_threshold(opt.thresholds, kv);
  auto results = bct::run_verification(opt);
  bct::Json items = bct::Json::array();
  bool hard_ok = true;
  bool soft_ok = true;
  for (const auto& r : results) {
    items.push_back(bct::to_json(r));
    if (!r.passed) {
      (r.hard ? hard_ok : soft_ok) = false;
      std::cerr << "FAIL " << r.id << ": " << r.name << "\n";
      if (!r.witness.is_null()) std::cerr << "  witness: " << r.witness.dump() << "\n";
      if (r.detail.contains("exception")) {
        std::cerr << "  error: " << r.detail["exception"].get<std::string>() << "\n";
      }
    }
  }
  bct::Json doc{{"command", "verify"},
                {"seed", cfg.seed},
                {"quick", cfg.quick},
                {"injected_fault", cfg.inject_bug},
                {"hard_assertions_passed", hard_ok},
                {"statistical_suites_passed", soft_ok},
                {"checks", items}};
  emit(doc, cfg.out);
  if (!hard_ok) return kHardFailure;
  return soft_ok ? kOk : kSoftFailure;
}

void add_model_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("-m,--alphabet-size", cfg.m, "Alphabet size m >= 2")->required();
  cmd->add_option("-D,--depth", cfg.depth, "Maximal context depth D")->required();
  cmd->add_option("--beta", cfg.beta, "Prior hyperparameter in (0,1)")
      ->capture_default_str();
  cmd->add_option("--context", cfg.context,
                  "Initial context: 'peel' takes the first D symbols of the input; "
                  "otherwise D symbols, oldest first")
      ->capture_default_str();
  cmd->add_option("--out", cfg.out, "Report path (default stdout)");
  cmd->add_option("input", cfg.input, "Symbol file")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian context trees: fitting, prediction, simulation, verification"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* fit = app.add_subcommand("fit", "MAP tree, model posterior and leaf posteriors");
  add_model_options(fit, cfg);

  auto* eval = app.add_subcommand("eval", "Sequential log-loss of the mixture");
  add_model_options(eval, cfg);
  eval->add_flag("--check-batch", cfg.check_batch,
                 "Also recompute the total from batch counts");

  auto* predict = app.add_subcommand("predict", "Per-symbol predictive distributions");
  add_model_options(predict, cfg);
  predict->add_option("--per-symbol", cfg.per_symbol, "CSV output path")->required();
  predict->add_flag("--check-batch", cfg.check_batch,
                    "Also recompute the total from batch counts");

  auto* simulate = app.add_subcommand("simulate", "Sample from a chain spec");
  simulate->add_option("--spec", cfg.spec_path, "Chain spec (JSON)")->required();
  simulate->add_option("-n", cfg.n, "Number of symbols after the context")->required();
  simulate->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  simulate->add_option("--context", cfg.context,
                       "Initial context (default: stationary draw if ergodic, else zeros)");
  simulate->add_option("--out", cfg.out, "Output symbol file (default stdout)");
  simulate->add_flag("--require-ergodic", cfg.require_ergodic,
                     "Refuse chains that are not irreducible and aperiodic");

  auto* verify = app.add_subcommand("verify", "Oracle checks, bounds and simulation suites");
  verify->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  verify->add_flag("--quick", cfg.quick, "Hard assertions only, reduced sizes");
  verify->add_flag("--inject-bug", cfg.inject_bug,
                   "Misread beta as 1-beta on one side of the oracle check");
  verify->add_option("--threshold", cfg.thresholds, "Override a suite threshold, key=value");
  verify->add_option("--out", cfg.out, "Report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (*fit) return cmd_fit(cfg);
    if (*eval) return cmd_eval(cfg, false);
    if (*predict) return cmd_eval(cfg, true);
    if (*simulate) return cmd_simulate(cfg);
    if (*verify) return cmd_verify(cfg);
  } catch (const bct::ParseError& e) {
    std::cerr << "bct: parse error: " << e.what() << "\n";
    return kParseFailure;
  } catch (const bct::ErgodicityError& e) {
    std::cerr << "bct: " << e.what() << "\n";
    return cfg.require_ergodic ? kNotErgodic : kInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "bct: " << e.what() << "\n";
    return kInvalidConfig;
  }
  return kInvalidConfig;
}
