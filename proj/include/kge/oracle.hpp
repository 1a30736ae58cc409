// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "kge/train.hpp"

namespace kge::oracle {

// Hard size guards; these paths run at the complexity the efficient code
// exists to avoid and must never dominate CI time.
inline constexpr std::int64_t kMaxEntities = 64;
inline constexpr std::int64_t kMaxRelations = 8;
inline constexpr std::int64_t kMaxDim = 16;

// Looser guard for the benchmark's naive arm, which times the cubic loop at
// |E|=500.
inline constexpr std::int64_t kBenchMaxEntities = 1024;
inline constexpr std::int64_t kBenchMaxRelations = 64;
inline constexpr std::int64_t kBenchMaxDim = 64;

/// Literal triple loop over all (h,r,t): sum of c (f - f_hat)^2 with f = 1 on
/// training triples and 0 elsewhere, c = c_pos / c_neg accordingly.
double naive_full_loss(ModelKind kind, const ParameterSet& params, const Dataset& dataset,
                       double c_pos, double c_neg);

/// Triple-loop sum of score^2 over all of E x R x E (the all-pairs term
/// before weighting). Bench guard sizes.
double naive_square_sum(ModelKind kind, const ParameterSet& params);

enum class FdPath {
  Efficient,  // differentiates the expression the trainer optimizes
  Naive,      // differentiates naive_full_loss (+ the same l2 rule)
};

/// Central finite differences of the full loss per parameter entry.
std::map<std::string, Matrix> fd_gradient(ModelKind kind, const ParameterSet& params,
                                          const Dataset& dataset, const TrainConfig& config,
                                          double step, FdPath path = FdPath::Efficient);

/// |a - b| / max(1, |b|), the comparison used throughout the test suites.
double rel_err(double a, double b);

}  // namespace kge::oracle
