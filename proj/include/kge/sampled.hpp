// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>

#include "kge/train.hpp"

namespace kge {

struct SamplerConfig {
  std::int64_t negatives_per_positive = 25;
  std::int64_t batch_size = 4000;
  void validate() const;
};

/// Draws k corruptions of one positive: head or tail (fair coin) replaced by
/// a uniform entity such that the corrupted triple is absent from the index.
/// A saturated side falls back to the other; if both sides are saturated the
/// triple yields nothing and *skipped is bumped.
std::vector<Triple> sample_negatives(const Triple& positive, std::int64_t k,
                                     const AdjacencyIndex& index, std::mt19937_64& rng,
                                     std::int64_t* skipped = nullptr);

/// Mini-batch Adam baseline with the same square loss, initialization and
/// (for TransE) projection as the non-sampling trainer. Negatives are
/// resampled every epoch.
TrainResult train_sampled(const TrainConfig& config, const SamplerConfig& sampler,
                          const Dataset& dataset);

}  // namespace kge
