// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "kge/data.hpp"
#include "kge/models.hpp"

namespace kge {

enum class RankMode { Raw, Filtered };
enum class Direction { ReplaceTail, ReplaceHead };

struct RankMetrics {
  double mr = 0.0;
  double mrr = 0.0;
  double hr1 = 0.0;
  double hr3 = 0.0;
  double hr10 = 0.0;
  std::int64_t evaluation_count = 0;
};

/// 1-based rank of the truth among all |E| candidates with the mid-tie
/// convention: 1 + (strictly higher) + floor(equal/2), equal excluding the
/// truth itself. Filtered mode drops other known-true candidates (the truth
/// is never dropped); it requires a filter index over train+valid+test.
std::int64_t rank_one(ModelKind kind, const ParameterSet& params, std::int32_t fixed_entity,
                      std::int32_t relation, Direction direction, std::int32_t truth,
                      RankMode mode, const AdjacencyIndex* filter);

/// Aggregates (rank_h, rank_t) pairs:
///   MR  = sum (rank_h + rank_t) / 2|S|
///   MRR = sum (1/rank_h + 1/rank_t) / 2|S|
///   HR@K = fraction of the 2|S| evaluations with rank <= K.
RankMetrics metrics_from_ranks(const std::vector<std::pair<std::int64_t, std::int64_t>>& ranks);

/// Head and tail replacement over every triple of the evaluation set: 2|S|
/// rankings. Queries are independent; aggregation order is fixed.
RankMetrics evaluate(ModelKind kind, const ParameterSet& params,
                     const std::vector<Triple>& eval_set, RankMode mode,
                     const AdjacencyIndex* filter, int threads = 1);

}  // namespace kge
