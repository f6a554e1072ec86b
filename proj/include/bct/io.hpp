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
// File: io.hpp
// -----------------------------------------------------------------------------
//
// File formats.
//
// Symbol files: UTF-8 text, whitespace-separated integers in 0..m-1, one
// sequence per file.
//
// Chain spec documents (JSON):
//   {"m": 2, "D": 5, "tree": "(()())", "theta": [[0.9, 0.1], [0.2, 0.8]]}
// with one theta row per leaf in canonical (depth-first, symbol) order.
//
// Reports are JSON objects; doubles are written in shortest round-trip form.

#ifndef BCT_IO_HPP_
#define BCT_IO_HPP_

#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bct/chain.hpp"
#include "bct/common.hpp"
#include "bct/context_tree.hpp"
#include "bct/inference.hpp"
#include "bct/theory.hpp"
#include "json.hpp"

namespace bct {

using Json = nlohmann::ordered_json;

/// Reads whitespace-separated symbols. Any token that is not a decimal
/// integer in [0, m) raises ParseError with its line and column.
inline std::vector<Symbol> read_symbols(std::istream& in, std::size_t m) {
  std::vector<Symbol> out;
  std::size_t line = 1;
  std::size_t column = 0;
  std::size_t tok_line = 0;
  std::size_t tok_col = 0;
  std::string tok;
  auto flush = [&] {
    if (tok.empty()) return;
    for (char c : tok) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        throw ParseError("invalid symbol token '" + tok + "'", tok_line, tok_col);
      }
    }
    unsigned long long v = 0;
    try {
      v = std::stoull(tok);
    } catch (...) {
      throw ParseError("symbol token out of range '" + tok + "'", tok_line, tok_col);
    }
    if (v >= m) {
      throw ParseError("symbol " + tok + " outside alphabet of size " +
                           std::to_string(m),
                       tok_line, tok_col);
    }
    out.push_back(static_cast<Symbol>(v));
    tok.clear();
  };
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      const char c = buf[i];
      ++column;
      if (c == '\n') {
        flush();
        ++line;
        column = 0;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        flush();
      } else {
        if (tok.empty()) {
          tok_line = line;
          tok_col = column;
        }
        tok += c;
      }
    }
  }
  flush();
  return out;
}

inline void write_symbols(std::ostream& out, const std::vector<Symbol>& xs) {
  constexpr std::size_t kPerLine = 64;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << xs[i] << ((i + 1) % kPerLine == 0 || i + 1 == xs.size() ? '\n' : ' ');
  }
}

/// Parses an explicit initial context: symbols separated by spaces or
/// commas, oldest first. A run of digits without separators is read one
/// digit per symbol when m <= 10.
inline std::vector<Symbol> parse_context_argument(const std::string& text,
                                                  std::size_t m) {
  std::string norm = text;
  for (char& c : norm) {
    if (c == ',') c = ' ';
  }
  std::vector<Symbol> out;
  std::istringstream in(norm);
  std::string tok;
  while (in >> tok) {
    if (m <= 10 && tok.size() > 1) {
      for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
          throw InputError("invalid context '" + text + "'");
        }
        out.push_back(static_cast<Symbol>(c - '0'));
      }
    } else {
      for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
          throw InputError("invalid context '" + text + "'");
        }
      }
      out.push_back(static_cast<Symbol>(std::stoul(tok)));
    }
  }
  for (Symbol x : out) {
    if (x >= m) throw InputError("context symbol outside the alphabet");
  }
  return out;
}

inline ChainSpec chain_spec_from_json(const Json& doc) {
  ChainSpec spec;
  try {
    spec.m = doc.at("m").get<std::size_t>();
    spec.depth = doc.at("D").get<std::size_t>();
    spec.tree = ContextTree::parse(doc.at("tree").get<std::string>(), spec.m);
    spec.theta = ParameterVector::from_rows(
        spec.tree, doc.at("theta").get<std::vector<std::vector<double>>>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("chain spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

inline ChainSpec read_chain_spec(std::istream& in) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    // byte offset only; report it as a column on line 1
    throw ParseError(std::string("chain spec JSON: ") + e.what(), 1, e.byte);
  }
  return chain_spec_from_json(doc);
}

inline Json to_json(const ChainSpec& spec) {
  Json rows = Json::array();
  for (const Context& s : spec.tree.leaves()) rows.push_back(spec.theta.at(s));
  return Json{{"m", spec.m},
              {"D", spec.depth},
              {"tree", spec.tree.to_string()},
              {"theta", rows}};
}

inline Json to_json(const RegretReport& r) {
  return Json{{"n", r.n},
              {"log_mixture", r.log_mixture},
              {"log_likelihood", r.log_likelihood},
              {"regret", r.regret},
              {"count_bound", r.count_bound},
              {"count_slack", r.count_slack},
              {"log_n_applicable", r.log_n_applicable},
              {"log_n_bound", r.log_n_bound},
              {"log_n_slack", r.log_n_slack}};
}

inline Json to_json(const ConsistencyReport& r) {
  Json pts = Json::array();
  for (const auto& p : r.points) {
    pts.push_back(Json{{"n", p.n},
                       {"recovery_fraction", p.recovery_fraction},
                       {"mean_posterior", p.mean_posterior},
                       {"mean_parameter_error", p.mean_parameter_error}});
  }
  return Json{{"true_tree", r.true_tree},
              {"beta", r.beta},
              {"replicates", r.replicates},
              {"points", pts},
              {"monotonicity_testable", r.monotonicity_testable},
              {"recovery_nondecreasing", r.recovery_nondecreasing},
              {"posterior_nondecreasing", r.posterior_nondecreasing},
              {"error_nonincreasing", r.error_nonincreasing}};
}

inline Json to_json(const PredictiveReport& r, std::size_t m = 2) {
  Json z = Json::array();
  for (const auto& s : r.zeta) {
    z.push_back(Json{{"context", context_to_string(s.context, m)},
                     {"mean", s.mean},
                     {"max", s.max}});
  }
  return Json{{"n", r.n},
              {"replicates", r.replicates},
              {"mean_max_deviation", r.mean_max_deviation},
              {"zeta", z}};
}

inline Json to_json(const NormalityReport& r) {
  return Json{{"n", r.n},
              {"max_relative_deviation_diagonal", r.max_relative_deviation_diagonal},
              {"max_relative_deviation_offdiagonal",
               r.max_relative_deviation_offdiagonal},
              {"max_mean_error", r.max_mean_error},
              {"offdiagonal_signs_match", r.offdiagonal_signs_match}};
}

inline Json to_json(const SmbtReport& r) {
  return Json{{"n", r.n},
              {"tree", r.tree},
              {"normalized_neg_log_marginal", r.normalized_neg_log_marginal},
              {"entropy_rate", r.entropy_rate},
              {"gap", r.gap}};
}

}  // namespace bct

#endif  // BCT_IO_HPP_
