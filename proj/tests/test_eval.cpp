// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include "doctest.h"
#include "kge/eval.hpp"
#include "test_util.hpp"

using namespace kge;
using kge::testutil::tiny_instance;

namespace {

// d=1 DistMult so candidate scores are directly proportional to the entity
// values; handy for constructing exact ranks.
ParameterSet distmult_1d(const std::vector<double>& entities) {
  ParameterSet p;
  p.kind = ModelKind::DistMult;
  p.entity_count = static_cast<std::int64_t>(entities.size());
  p.relation_count = 1;
  p.dim = 1;
  Matrix e(p.entity_count, 1), r(1, 1);
  for (std::size_t i = 0; i < entities.size(); ++i)
    e(static_cast<Eigen::Index>(i), 0) = entities[i];
  r << 1.0;
  p.tables.emplace_back("entity", e);
  p.tables.emplace_back("relation", r);
  return p;
}

// Sort-based reference with the same mid-tie rule.
std::int64_t sort_rank_oracle(const Vector& scores, std::int32_t truth) {
  std::vector<double> s(scores.data(), scores.data() + scores.size());
  std::vector<std::size_t> by_score(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) by_score[i] = i;
  std::sort(by_score.begin(), by_score.end(), [&](std::size_t a, std::size_t b) {
    return s[a] > s[b];
  });
  std::int64_t higher = 0, equal = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (static_cast<std::int32_t>(i) == truth) continue;
    if (s[i] > s[truth]) ++higher;
    if (s[i] == s[truth]) ++equal;
  }
  return 1 + higher + equal / 2;
}

}  // namespace

TEST_CASE("rank_one puts the best-scoring truth first") {
  const ParameterSet p = distmult_1d({0.9, 0.5, 0.1});
  // head entity 0 fixed (value 0.9): candidate scores are 0.9 * value
  CHECK(rank_one(ModelKind::DistMult, p, 0, 0, Direction::ReplaceTail, 0, RankMode::Raw,
                 nullptr) == 1);
  CHECK(rank_one(ModelKind::DistMult, p, 0, 0, Direction::ReplaceTail, 2, RankMode::Raw,
                 nullptr) == 3);
}

TEST_CASE("all-tie ranking lands mid-field") {
  const ParameterSet p = distmult_1d(std::vector<double>(9, 0.25));
  const std::int64_t rank =
      rank_one(ModelKind::DistMult, p, 0, 0, Direction::ReplaceTail, 4, RankMode::Raw, nullptr);
  CHECK(rank == 1 + (9 - 1) / 2);
}

TEST_CASE("rank_one matches the sort-based oracle on random instances") {
  for (ModelKind kind : kge::testutil::kAllKinds) {
    const auto inst = tiny_instance(kind, 47);
    const auto e = static_cast<std::int32_t>(inst.params.entity_count);
    for (std::int32_t h = 0; h < e; ++h) {
      const Vector scores = score_tails(kind, inst.params, h, 0);
      for (std::int32_t truth = 0; truth < e; ++truth)
        CHECK(rank_one(kind, inst.params, h, 0, Direction::ReplaceTail, truth, RankMode::Raw,
                       nullptr) == sort_rank_oracle(scores, truth));
    }
  }
}

TEST_CASE("raising the truth's score never worsens its rank") {
  std::vector<double> values = {0.3, 0.8, -0.2, 0.5, 0.41, 0.4};
  std::int64_t previous = 1000;
  for (double boost = 0.0; boost < 1.0; boost += 0.07) {
    auto v = values;
    v[2] += boost;
    const ParameterSet p = distmult_1d(v);
    const std::int64_t rank =
        rank_one(ModelKind::DistMult, p, 1, 0, Direction::ReplaceTail, 2, RankMode::Raw, nullptr);
    CHECK(rank <= previous);
    previous = rank;
  }
}

TEST_CASE("filtered rank never exceeds raw rank") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto inst = tiny_instance(ModelKind::ComplEx, 100 + seed);
    const auto& ds = inst.dataset;
    const AdjacencyIndex idx = build_index(ds.train, ds.entity_count, ds.relation_count);
    for (const Triple& t : ds.train) {
      const auto raw = rank_one(ModelKind::ComplEx, inst.params, t.head, t.relation,
                                Direction::ReplaceTail, t.tail, RankMode::Raw, nullptr);
      const auto filt = rank_one(ModelKind::ComplEx, inst.params, t.head, t.relation,
                                 Direction::ReplaceTail, t.tail, RankMode::Filtered, &idx);
      CHECK(filt <= raw);
    }
  }
}

TEST_CASE("metric formulas on the single-triple rank pair (2, 4)") {
  const RankMetrics m = metrics_from_ranks({{2, 4}});
  CHECK(m.mr == 3.0);
  CHECK(m.mrr == 0.375);
  CHECK(m.hr1 == 0.0);
  CHECK(m.hr3 == 0.5);
  CHECK(m.hr10 == 1.0);
  CHECK(m.evaluation_count == 2);
}

TEST_CASE("perfect ranks give perfect metrics") {
  const RankMetrics m = metrics_from_ranks({{1, 1}, {1, 1}, {1, 1}});
  CHECK(m.mr == 1.0);
  CHECK(m.mrr == 1.0);
  CHECK(m.hr1 == 1.0);
  CHECK(m.hr10 == 1.0);
  CHECK(m.evaluation_count == 6);
}

TEST_CASE("hit rates are monotone in K and bounded") {
  const auto inst = tiny_instance(ModelKind::SimplE, 7);
  const RankMetrics m =
      evaluate(ModelKind::SimplE, inst.params, inst.dataset.train, RankMode::Raw, nullptr);
  CHECK(m.hr1 <= m.hr3);
  CHECK(m.hr3 <= m.hr10);
  CHECK(m.hr10 <= 1.0);
  CHECK(m.mr >= 1.0);
  CHECK(m.mrr > 0.0);
  CHECK(m.mrr <= 1.0);
  CHECK(m.evaluation_count == 2 * static_cast<std::int64_t>(inst.dataset.train.size()));
}

TEST_CASE("evaluate is invariant under test-set permutation") {
  const auto inst = tiny_instance(ModelKind::TransE, 13);
  std::vector<Triple> shuffled = inst.dataset.train;
  std::reverse(shuffled.begin(), shuffled.end());
  const RankMetrics a =
      evaluate(ModelKind::TransE, inst.params, inst.dataset.train, RankMode::Raw, nullptr);
  const RankMetrics b = evaluate(ModelKind::TransE, inst.params, shuffled, RankMode::Raw, nullptr);
  CHECK(a.mr == b.mr);
  CHECK(a.mrr == b.mrr);
  CHECK(a.hr10 == b.hr10);
}

TEST_CASE("evaluate rejects an empty set and threaded evaluation matches serial") {
  const auto inst = tiny_instance(ModelKind::DistMult, 3);
  CHECK_THROWS_AS(evaluate(ModelKind::DistMult, inst.params, {}, RankMode::Raw, nullptr),
                  UsageError);
  // force the threaded path with a bigger set
  const Dataset big = make_synthetic(3, 30, 3, 200);
  const ParameterSet p = init_params(ModelKind::DistMult, 30, 3, 4, 4);
  const RankMetrics serial = evaluate(ModelKind::DistMult, p, big.train, RankMode::Raw, nullptr, 1);
  const RankMetrics threaded =
      evaluate(ModelKind::DistMult, p, big.train, RankMode::Raw, nullptr, 4);
  CHECK(serial.mr == threaded.mr);
  CHECK(serial.mrr == threaded.mrr);
}
