// SPDX-License-Identifier: Apache-2.0
#include "kge/sampled.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>

namespace kge {

void SamplerConfig::validate() const {
  if (negatives_per_positive < 1) throw UsageError("neg-k must be >= 1");
  if (batch_size < 1) throw UsageError("batch must be >= 1");
}

namespace {

std::int32_t draw_entity(std::mt19937_64& rng, std::int64_t entity_count) {
  return static_cast<std::int32_t>(rng() % static_cast<std::uint64_t>(entity_count));
}

bool side_saturated(const std::vector<std::int32_t>* connected, std::int64_t entity_count) {
  return connected != nullptr &&
         static_cast<std::int64_t>(connected->size()) >= entity_count;
}

// Uniform draw from the complement of `connected` (sorted). Used after
// rejection sampling stalls on a nearly saturated slot.
std::int32_t draw_from_complement(std::mt19937_64& rng, std::int64_t entity_count,
                                  const std::vector<std::int32_t>& connected) {
  const std::int64_t free_count = entity_count - static_cast<std::int64_t>(connected.size());
  std::int64_t pick = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(free_count));
  std::int32_t cand = 0;
  std::size_t c = 0;
  for (;; ++cand) {
    if (c < connected.size() && connected[c] == cand) {
      ++c;
      continue;
    }
    if (pick == 0) return cand;
    --pick;
  }
}

}  // namespace

std::vector<Triple> sample_negatives(const Triple& positive, std::int64_t k,
                                     const AdjacencyIndex& index, std::mt19937_64& rng,
                                     std::int64_t* skipped) {
  if (k < 1) throw UsageError("sample_negatives: k must be >= 1");
  const std::int64_t n_entities = index.entity_count;
  const auto* connected_tails = index.tails(positive.head, positive.relation);
  const auto* connected_heads = index.heads(positive.tail, positive.relation);
  const bool tail_full = side_saturated(connected_tails, n_entities);
  const bool head_full = side_saturated(connected_heads, n_entities);
  if (tail_full && head_full) {
    if (skipped) ++*skipped;
    return {};
  }

  static constexpr int kMaxDraws = 64;
  std::vector<Triple> out;
  out.reserve(k);
  for (std::int64_t i = 0; i < k; ++i) {
    bool corrupt_tail = (rng() & 1u) == 0;
    if (corrupt_tail && tail_full) corrupt_tail = false;
    if (!corrupt_tail && head_full) corrupt_tail = true;

    Triple neg = positive;
    const auto* connected = corrupt_tail ? connected_tails : connected_heads;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxDraws; ++attempt) {
      const std::int32_t cand = draw_entity(rng, n_entities);
      if (connected != nullptr && std::binary_search(connected->begin(), connected->end(), cand))
        continue;
      (corrupt_tail ? neg.tail : neg.head) = cand;
      placed = true;
      break;
    }
    if (!placed) {
      static const std::vector<std::int32_t> kNone;
      const auto& conn = connected ? *connected : kNone;
      (corrupt_tail ? neg.tail : neg.head) = draw_from_complement(rng, n_entities, conn);
    }
    out.push_back(neg);
  }
  return out;
}

TrainResult train_sampled(const TrainConfig& config, const SamplerConfig& sampler,
                          const Dataset& dataset) {
  config.validate();
  sampler.validate();
  TrainResult out;
  out.params = init_params(config.kind, dataset.entity_count, dataset.relation_count, config.dim,
                           config.seed);
  const AdjacencyIndex index =
      build_index(dataset.train, dataset.entity_count, dataset.relation_count);

  std::map<std::string, AdamState> states;
  for (const auto& [role, t] : out.params.tables)
    states.emplace(role, make_adam_state(t.rows(), t.cols()));

  // Separate stream from parameter init so both trainers share initial tables.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  const std::size_t n = dataset.train.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<Triple> batch_pos, batch_neg;
  std::map<std::string, Matrix> grads = zero_gradients(out.params);
  std::int64_t skipped_total = 0;
  double current_lr = config.lr;

  for (std::int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = rng() % i;
      std::swap(order[i - 1], order[j]);
    }

    double pos_loss = 0.0, neg_loss = 0.0;
    bool bad = false;
    for (std::size_t lo = 0; lo < n && !bad; lo += sampler.batch_size) {
      const std::size_t hi = std::min(n, lo + sampler.batch_size);
      batch_pos.clear();
      batch_neg.clear();
      for (std::size_t i = lo; i < hi; ++i) {
        const Triple& pos = dataset.train[order[i]];
        batch_pos.push_back(pos);
        auto negs =
            sample_negatives(pos, sampler.negatives_per_positive, index, rng, &skipped_total);
        batch_neg.insert(batch_neg.end(), negs.begin(), negs.end());
      }

      for (auto& [role, g] : grads) g.setZero();
      // c+ (1 - f)^2 expands to c+ f^2 - 2 c+ f plus a constant c+ per triple.
      pos_loss += square_loss_accumulate(config.kind, out.params, batch_pos.data(),
                                         batch_pos.data() + batch_pos.size(), config.c_pos,
                                         config.c_pos, &grads) +
                  config.c_pos * static_cast<double>(batch_pos.size());
      neg_loss += square_loss_accumulate(config.kind, out.params, batch_neg.data(),
                                         batch_neg.data() + batch_neg.size(), config.c_neg, 0.0,
                                         &grads);
      if (!std::isfinite(pos_loss) || !std::isfinite(neg_loss)) {
        out.diverged = true;
        out.diagnostic = "epoch " + std::to_string(epoch) + ": non-finite batch loss";
        bad = true;
        break;
      }

      const double l2 = effective_l2(config.kind, config);
      if (l2 > 0.0)
        for (auto& [role, g] : grads) g += (2.0 * l2) * out.params.table(role);

      try {
        AdamHyper hp = config.adam;
        hp.lr = current_lr;
        for (auto& [role, table] : out.params.tables)
          adam_step(table, grads.at(role), states.at(role), hp, role);
        if (config.kind == ModelKind::TransE) project_unit_norm(out.params);
      } catch (const NumericError& err) {
        out.diverged = true;
        out.diagnostic = "epoch " + std::to_string(epoch) + ": " + err.what();
        bad = true;
        break;
      }
    }
    if (bad) break;

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double sq = 0.0;
    for (const auto& [role, t] : out.params.tables) sq += t.squaredNorm();
    out.history.push_back(EpochRecord{epoch, pos_loss + neg_loss, pos_loss, neg_loss, seconds,
                                      std::sqrt(sq)});

    if (epoch == (config.epochs + 1) / 2) current_lr *= config.lr_decay;
  }

  if (skipped_total > 0)
    std::cerr << "warning: " << skipped_total
              << " positives had no legal corruption on either side and were skipped\n";
  return out;
}

}  // namespace kge
