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
// File: common.hpp
// -----------------------------------------------------------------------------
//
// Shared vocabulary types, error classes and small numeric helpers.

#ifndef BCT_COMMON_HPP_
#define BCT_COMMON_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bct {

/// A symbol of the alphabet {0, ..., m-1}.
using Symbol = std::uint32_t;

/// A context string stored most-recent-symbol first: element 0 is x_{n-1},
/// element 1 is x_{n-2}, and so on. The empty context is the root.
using Context = std::vector<Symbol>;

/// Count of occurrences; 64-bit so overflow is unreachable in practice.
using Count = std::uint64_t;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Error hierarchy. Every library failure derives from bct::Error so callers
// can catch broadly or by category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Improper tree, depth violation, or a context that is not where it should be.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range data (e.g. a symbol >= m).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameter such as beta outside (0,1).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A quantity requested outside its domain (log of zero probability, M = 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Chain is reducible or periodic.
class ErgodicityError : public Error {
 public:
  using Error::Error;
};

/// A configured size cap would be exceeded; the message carries the size.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Text input that failed to parse; carries a 1-based line and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

inline void check_alphabet(std::size_t m) {
  if (m < 2) {
    throw ParameterError("alphabet size must be at least 2, got " +
                         std::to_string(m));
  }
}

inline void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw ParameterError("beta must lie strictly inside (0,1), got " +
                         std::to_string(beta));
  }
}

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

/// Renders a context as its symbols concatenated ("022"), using '.' as a
/// separator when the alphabet has more than ten symbols. The root renders as
/// "λ".
inline std::string context_to_string(const Context& s, std::size_t m = 2) {
  if (s.empty()) return "λ";
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (m > 10 && i > 0) out += '.';
    out += std::to_string(s[i]);
  }
  return out;
}

/// Parses the output of context_to_string back into a context.
inline Context context_from_string(const std::string& text, std::size_t m = 2) {
  Context s;
  if (text.empty() || text == "λ") return s;
  if (m > 10) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t dot = text.find('.', pos);
      if (dot == std::string::npos) dot = text.size();
      s.push_back(static_cast<Symbol>(std::stoul(text.substr(pos, dot - pos))));
      pos = dot + 1;
    }
  } else {
    for (char c : text) {
      if (c < '0' || c > '9') {
        throw InputError("bad context character '" + std::string(1, c) + "'");
      }
      s.push_back(static_cast<Symbol>(c - '0'));
    }
  }
  for (Symbol x : s) {
    if (x >= m) throw InputError("context symbol out of range: " + text);
  }
  return s;
}

/// splitmix64 finaliser; used to derive independent per-replicate seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for replicate `index` of a sweep rooted at `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

}  // namespace bct

#endif  // BCT_COMMON_HPP_
