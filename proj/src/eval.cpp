// SPDX-License-Identifier: Apache-2.0
#include "kge/eval.hpp"

#include <algorithm>
#include <thread>

namespace kge {

namespace {

std::int64_t rank_from_scores(const Vector& scores, std::int32_t truth,
                              const std::vector<std::int32_t>* known) {
  const double s_truth = scores[truth];
  std::int64_t higher = 0, equal = 0;
  for (Eigen::Index c = 0; c < scores.size(); ++c) {
    if (c == truth) continue;
    if (known != nullptr &&
        std::binary_search(known->begin(), known->end(), static_cast<std::int32_t>(c)))
      continue;
    if (scores[c] > s_truth)
      ++higher;
    else if (scores[c] == s_truth)
      ++equal;
  }
  return 1 + higher + equal / 2;
}

}  // namespace

std::int64_t rank_one(ModelKind kind, const ParameterSet& params, std::int32_t fixed_entity,
                      std::int32_t relation, Direction direction, std::int32_t truth,
                      RankMode mode, const AdjacencyIndex* filter) {
  if (mode == RankMode::Filtered && filter == nullptr)
    throw UsageError("rank_one: filtered mode needs an adjacency index");
  const Vector scores = direction == Direction::ReplaceTail
                            ? score_tails(kind, params, fixed_entity, relation)
                            : score_heads(kind, params, relation, fixed_entity);
  const std::vector<std::int32_t>* known = nullptr;
  if (mode == RankMode::Filtered) {
    known = direction == Direction::ReplaceTail ? filter->tails(fixed_entity, relation)
                                                : filter->heads(fixed_entity, relation);
  }
  return rank_from_scores(scores, truth, known);
}

RankMetrics metrics_from_ranks(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& ranks) {
  if (ranks.empty()) throw UsageError("metrics_from_ranks: empty rank list");
  RankMetrics m;
  m.evaluation_count = 2 * static_cast<std::int64_t>(ranks.size());
  std::int64_t h1 = 0, h3 = 0, h10 = 0;
  double mr = 0.0, mrr = 0.0;
  const auto tally = [&](std::int64_t rank) {
    mr += static_cast<double>(rank);
    mrr += 1.0 / static_cast<double>(rank);
    if (rank <= 1) ++h1;
    if (rank <= 3) ++h3;
    if (rank <= 10) ++h10;
  };
  for (const auto& [rank_h, rank_t] : ranks) {
    tally(rank_h);
    tally(rank_t);
  }
  const double n = static_cast<double>(m.evaluation_count);
  m.mr = mr / n;
  m.mrr = mrr / n;
  m.hr1 = static_cast<double>(h1) / n;
  m.hr3 = static_cast<double>(h3) / n;
  m.hr10 = static_cast<double>(h10) / n;
  return m;
}

RankMetrics evaluate(ModelKind kind, const ParameterSet& params,
                     const std::vector<Triple>& eval_set, RankMode mode,
                     const AdjacencyIndex* filter, int threads) {
  if (eval_set.empty()) throw UsageError("evaluate: empty evaluation set");
  std::vector<std::pair<std::int64_t, std::int64_t>> ranks(eval_set.size());
  const auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Triple& t = eval_set[i];
      const std::int64_t rank_t =
          rank_one(kind, params, t.head, t.relation, Direction::ReplaceTail, t.tail, mode, filter);
      const std::int64_t rank_h =
          rank_one(kind, params, t.tail, t.relation, Direction::ReplaceHead, t.head, mode, filter);
      ranks[i] = {rank_h, rank_t};
    }
  };
  if (threads <= 1 || eval_set.size() < 64) {
    run(0, eval_set.size());
  } else {
    const int workers = static_cast<int>(std::min<std::size_t>(threads, eval_set.size()));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      const std::size_t lo = eval_set.size() * w / workers;
      const std::size_t hi = eval_set.size() * (w + 1) / workers;
      pool.emplace_back(run, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return metrics_from_ranks(ranks);
}

}  // namespace kge
