// SPDX-License-Identifier: Apache-2.0
#include <chrono>

#include "doctest.h"
#include "kge/bench.hpp"

using namespace kge;

TEST_CASE("median helper") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), UsageError);
}

TEST_CASE("time_loss_paths value handshake on the 1x1x1 case") {
  const LossPathReport r = time_loss_paths(ModelKind::DistMult, 1, 1, 1, 3, 5);
  CHECK(r.value_rel_err < 1e-12);
  CHECK(r.naive_median_s >= 0.0);
  CHECK(r.efficient_median_s >= 0.0);
}

TEST_CASE("time_loss_paths reports a large ratio at a mid-size instance") {
  // Small cousin of the acceptance-scale measurement; direction only.
  const LossPathReport r = time_loss_paths(ModelKind::DistMult, 200, 8, 16, 3, 5);
  CHECK(r.value_rel_err < 1e-8);
  CHECK(r.ratio > 1.0);
}

TEST_CASE("efficient path time grows roughly quadratically in d") {
  // Time the efficient evaluation alone at d and 2d; the d^2 (|E|+|R|) cost
  // model predicts ~4x, checked within a factor-2 band.
  const std::int64_t entities = 20000, relations = 50;
  const auto time_at = [&](std::int64_t d) {
    const ParameterSet p = init_params(ModelKind::DistMult, entities, relations, d, 3);
    volatile double sink = 0.0;
    sink = all_pairs_loss(ModelKind::DistMult, p, 1.0);  // warm-up
    std::vector<double> times;
    for (int rep = 0; rep < 9; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      sink = all_pairs_loss(ModelKind::DistMult, p, 1.0);
      times.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    (void)sink;
    return median(times);
  };
  // wall-clock banding: allow a couple of retries against scheduler noise
  double growth = 0.0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    growth = time_at(32) / time_at(16);
    if (growth > 2.0 && growth < 8.0) break;
  }
  CHECK(growth > 2.0);
  CHECK(growth < 8.0);
}

TEST_CASE("compare_epoch_time produces 8 rows and speedups") {
  const Dataset ds = make_synthetic(17, 300, 6, 3000);
  TrainConfig base;
  base.lr = 1e-3;
  base.seed = 1;
  SamplerConfig sampler;
  sampler.negatives_per_positive = 8;
  sampler.batch_size = 512;
  const EpochReport rep = compare_epoch_time(ds, 16, 3, base, sampler);
  CHECK(rep.rows.size() == 8);
  CHECK(rep.ns_order.size() == 4);
  int ns_rows = 0;
  for (const EpochRow& row : rep.rows) {
    CHECK(row.median_epoch_s > 0.0);
    if (row.mode == "ns") {
      ++ns_rows;
      CHECK(row.speedup > 0.0);
    }
  }
  CHECK(ns_rows == 4);

  const auto j = to_json(rep);
  CHECK(j["rows"].size() == 8);
  const std::string table = to_text_table(rep);
  CHECK(table.find("speed-up") != std::string::npos);
  CHECK(table.find("distmult") != std::string::npos);
}
