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
// File: estimator.hpp
// -----------------------------------------------------------------------------
//
// Krichevsky-Trofimov estimated probabilities: the Dirichlet(1/2,...,1/2)
// marginal probability P_e(a) of a count vector, its sequential form, and
// the classical upper/lower bounds on log P_e(a).

#ifndef BCT_ESTIMATOR_HPP_
#define BCT_ESTIMATOR_HPP_

#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "bct/common.hpp"

namespace bct {

/// log P_e(a), with P_e = prod_j [(1/2)(3/2)...(a_j - 1/2)] /
/// [(m/2)(m/2+1)...(m/2+M-1)] and m = a.size(). Zero when M = 0.
inline double pe_log(std::span<const Count> a) {
  static const double kLgammaHalf = std::lgamma(0.5);
  const double m = static_cast<double>(a.size());
  double total = 0.0;
  double out = 0.0;
  for (Count c : a) {
    if (c == 0) continue;
    out += std::lgamma(static_cast<double>(c) + 0.5) - kLgammaHalf;
    total += static_cast<double>(c);
  }
  if (total == 0.0) return 0.0;
  return out - (std::lgamma(total + 0.5 * m) - std::lgamma(0.5 * m));
}

/// Sequential KT probability of seeing `j` next given counts `a`:
/// (a_j + 1/2) / (M + m/2).
inline double pe_step(std::span<const Count> a, Symbol j) {
  if (j >= a.size()) {
    throw InputError("symbol " + std::to_string(j) + " outside alphabet of size " +
                     std::to_string(a.size()));
  }
  Count total = 0;
  for (Count c : a) total += c;
  return (static_cast<double>(a[j]) + 0.5) /
         (static_cast<double>(total) + 0.5 * static_cast<double>(a.size()));
}

struct PeBounds {
  double lower;
  double upper;
};

/// Bounds on log P_e(a) in terms of the empirical entropy:
///   lower = sum_j a_j log(a_j/M) - (m-1)/2 log M - log m
///   upper = sum_j a_j log(a_j/M) - (m-1)/2 log(M/2pi) - log(pi^{m/2}/Gamma(m/2))
/// with 0 log 0 = 0. Requires M >= 1.
inline PeBounds pe_bounds(std::span<const Count> a) {
  const double m = static_cast<double>(a.size());
  double total = 0.0;
  for (Count c : a) total += static_cast<double>(c);
  if (total == 0.0) throw DomainError("pe_bounds requires a nonzero count vector");
  double fit = 0.0;
  for (Count c : a) {
    if (c == 0) continue;
    const double x = static_cast<double>(c);
    fit += x * std::log(x / total);
  }
  const double log_pi = std::log(std::numbers::pi);
  const double half_free = 0.5 * (m - 1.0);
  PeBounds b;
  b.lower = fit - half_free * std::log(total) - std::log(m);
  b.upper = fit - half_free * (std::log(total) - std::log(2.0 * std::numbers::pi)) -
            (0.5 * m * log_pi - std::lgamma(0.5 * m));
  return b;
}

}  // namespace bct

#endif  // BCT_ESTIMATOR_HPP_
