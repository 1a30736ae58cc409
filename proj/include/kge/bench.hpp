// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "kge/sampled.hpp"
#include "kge/train.hpp"

namespace kge {

/// Naive-vs-efficient all-pairs loss timing at one problem size. Both arms
/// are value-checked against each other before any timing is reported.
struct LossPathReport {
  ModelKind kind = ModelKind::DistMult;
  std::int64_t entities = 0, relations = 0, dim = 0;
  int repeats = 0;
  int threads = 1;  // timed regions are single-threaded
  double naive_median_s = 0.0;
  double naive_min_s = 0.0, naive_max_s = 0.0;
  double efficient_median_s = 0.0;
  double efficient_min_s = 0.0, efficient_max_s = 0.0;
  double ratio = 0.0;  // naive / efficient
  double value_rel_err = 0.0;
};

LossPathReport time_loss_paths(ModelKind kind, std::int64_t entities, std::int64_t relations,
                               std::int64_t dim, int repeats, std::uint64_t seed);

/// Per-model epoch timing for the non-sampling trainer and the sampled
/// baseline on the same dataset. One warm-up epoch is discarded; the median
/// of the remaining timed epochs is reported.
struct EpochRow {
  ModelKind kind = ModelKind::DistMult;
  std::string mode;  // "ns" or "sampled"
  double median_epoch_s = 0.0;
  double min_epoch_s = 0.0, max_epoch_s = 0.0;
  double speedup = 0.0;  // sampled / ns, filled on ns rows
};

struct EpochReport {
  std::vector<EpochRow> rows;
  std::vector<ModelKind> ns_order;  // ascending ns epoch time
  int timed_epochs = 0;
  int threads = 1;
};

EpochReport compare_epoch_time(const Dataset& dataset, std::int64_t dim, int timed_epochs,
                               const TrainConfig& base, const SamplerConfig& sampler);

nlohmann::json to_json(const LossPathReport& report);
nlohmann::json to_json(const EpochReport& report);
std::string to_text_table(const EpochReport& report);

double median(std::vector<double> values);

}  // namespace kge
