// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "kge/eval.hpp"
#include "kge/oracle.hpp"
#include "kge/train.hpp"
#include "test_util.hpp"

using namespace kge;
using kge::testutil::kAllKinds;
using kge::testutil::tiny_instance;

namespace {

TrainConfig tiny_config(ModelKind kind, std::int64_t dim) {
  TrainConfig cfg;
  cfg.kind = kind;
  cfg.dim = dim;
  cfg.c_pos = 1.0;
  cfg.c_neg = 0.01;
  return cfg;
}

}  // namespace

TEST_CASE("positive_loss on zero parameters is zero for factorization models") {
  for (ModelKind kind : {ModelKind::DistMult, ModelKind::SimplE, ModelKind::ComplEx}) {
    auto inst = tiny_instance(kind, 2);
    for (auto& [role, t] : inst.params.tables) t.setZero();
    CHECK(positive_loss(kind, inst.params, inst.dataset, 1.0, 0.5) == 0.0);
  }
}

TEST_CASE("positive_loss hand case: one triple scoring 1") {
  ParameterSet p;
  p.kind = ModelKind::DistMult;
  p.entity_count = 1;
  p.relation_count = 1;
  p.dim = 1;
  p.tables.emplace_back("entity", Matrix::Ones(1, 1));
  p.tables.emplace_back("relation", Matrix::Ones(1, 1));
  Dataset ds;
  ds.entity_count = 1;
  ds.relation_count = 1;
  ds.train = {Triple{0, 0, 0}};
  CHECK(positive_loss(ModelKind::DistMult, p, ds, 1.0, 0.0) == doctest::Approx(-1.0));
}

TEST_CASE("all_pairs_loss 1x1x1 hand case is 144") {
  ParameterSet p;
  p.kind = ModelKind::DistMult;
  p.entity_count = 1;
  p.relation_count = 1;
  p.dim = 1;
  Matrix e(1, 1), r(1, 1);
  e << 2;
  r << 3;
  p.tables.emplace_back("entity", e);
  p.tables.emplace_back("relation", r);
  CHECK(all_pairs_loss(ModelKind::DistMult, p, 1.0) == doctest::Approx(144.0));
  CHECK(all_pairs_loss(ModelKind::DistMult, p, 0.0) == 0.0);
}

// Eq-(2)-to-(3) identity end to end: naive whole-graph loss equals
// L^P + L^A + c+ |train| for every kind.
TEST_CASE("loss split identity against the naive oracle") {
  for (ModelKind kind : kAllKinds) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto inst = tiny_instance(kind, 40 + seed);
      const double c_pos = 1.0, c_neg = 0.003;
      const double naive = oracle::naive_full_loss(kind, inst.params, inst.dataset, c_pos, c_neg);
      const double split = positive_loss(kind, inst.params, inst.dataset, c_pos, c_neg) +
                           all_pairs_loss(kind, inst.params, c_neg) +
                           c_pos * static_cast<double>(inst.dataset.train.size());
      CHECK(oracle::rel_err(split, naive) < 1e-8);
    }
  }
}

TEST_CASE("all_pairs_loss is invariant under entity row permutation") {
  for (ModelKind kind : kAllKinds) {
    auto inst = tiny_instance(kind, 55);
    const double before = all_pairs_loss(kind, inst.params, 1.0);
    // reverse the entity rows in every entity-role table
    for (auto& [role, t] : inst.params.tables)
      if (is_entity_role(role)) t = t.colwise().reverse().eval();
    const double after = all_pairs_loss(kind, inst.params, 1.0);
    CHECK(oracle::rel_err(after, before) < 1e-12);
  }
}

TEST_CASE("zero parameters give zero all-pairs gradient") {
  auto inst = tiny_instance(ModelKind::DistMult, 3);
  for (auto& [role, t] : inst.params.tables) t.setZero();
  Dataset empty;
  empty.entity_count = inst.dataset.entity_count;
  empty.relation_count = inst.dataset.relation_count;
  const auto bd = loss_and_gradients(ModelKind::DistMult, inst.params, empty,
                                     tiny_config(ModelKind::DistMult, inst.params.dim));
  for (const auto& [role, g] : bd.grads) CHECK(g.isZero(0.0));
}

TEST_CASE("doubling c_neg doubles the all-pairs gradient exactly") {
  for (ModelKind kind : kAllKinds) {
    const auto inst = tiny_instance(kind, 17);
    Dataset empty;  // isolate L^A: no positives, no l2
    empty.entity_count = inst.dataset.entity_count;
    empty.relation_count = inst.dataset.relation_count;
    TrainConfig cfg = tiny_config(kind, inst.params.dim);
    cfg.c_neg = 0.25;  // powers of two keep the doubling exact in binary
    const auto bd1 = loss_and_gradients(kind, inst.params, empty, cfg);
    cfg.c_neg = 0.5;
    const auto bd2 = loss_and_gradients(kind, inst.params, empty, cfg);
    for (const auto& [role, g] : bd1.grads) CHECK((2.0 * g) == bd2.grads.at(role));
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  for (ModelKind kind : kAllKinds) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto inst = tiny_instance(kind, 60 + seed);
      TrainConfig cfg = tiny_config(kind, inst.params.dim);
      cfg.l2 = 1e-3;
      const auto analytic = loss_and_gradients(kind, inst.params, inst.dataset, cfg);
      const auto fd = oracle::fd_gradient(kind, inst.params, inst.dataset, cfg, 1e-5);
      for (const auto& [role, g] : analytic.grads) {
        const Matrix& f = fd.at(role);
        for (Eigen::Index i = 0; i < g.rows(); ++i)
          for (Eigen::Index j = 0; j < g.cols(); ++j)
            CHECK(oracle::rel_err(g(i, j), f(i, j)) < 1e-4);
      }
    }
  }
}

// For the factorization models the naive loss is the same polynomial as the
// efficient one, so finite differences of either path agree. (For TransE the
// two expressions only coincide on the unit sphere, so its gradient check is
// pinned to the expression the trainer optimizes.)
TEST_CASE("fd through the naive path agrees for factorization models") {
  for (ModelKind kind : {ModelKind::DistMult, ModelKind::SimplE, ModelKind::ComplEx}) {
    const auto inst = tiny_instance(kind, 71);
    const TrainConfig cfg = tiny_config(kind, inst.params.dim);
    const auto analytic = loss_and_gradients(kind, inst.params, inst.dataset, cfg);
    const auto fd =
        oracle::fd_gradient(kind, inst.params, inst.dataset, cfg, 1e-5, oracle::FdPath::Naive);
    for (const auto& [role, g] : analytic.grads) {
      const Matrix& f = fd.at(role);
      for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
          CHECK(oracle::rel_err(g(i, j), f(i, j)) < 1e-4);
    }
  }
}

TEST_CASE("fd error shrinks quadratically with the step") {
  for (ModelKind kind : kAllKinds) {
    auto inst = tiny_instance(kind, 83);
    // Inflate the cubic-and-higher loss terms so truncation error dominates
    // rounding at the coarse step; near the origin the loss is almost
    // quadratic per coordinate and central differences are exact.
    if (kind != ModelKind::TransE)
      for (auto& [role, t] : inst.params.tables) t *= 2.5;
    TrainConfig cfg = tiny_config(kind, inst.params.dim);
    cfg.c_neg = 1.0;
    const auto analytic = loss_and_gradients(kind, inst.params, inst.dataset, cfg);
    const auto err_at = [&](double step) {
      const auto fd = oracle::fd_gradient(kind, inst.params, inst.dataset, cfg, step);
      double worst = 0.0;
      for (const auto& [role, g] : analytic.grads) {
        const Matrix& f = fd.at(role);
        worst = std::max(worst, (g - f).cwiseAbs().maxCoeff());
      }
      return worst;
    };
    const double coarse = err_at(1e-3);
    const double mid = err_at(1e-4);
    const double fine = err_at(1e-5);
    if (kind == ModelKind::SimplE) {
      // SimplE's head-role and tail-role tables never multiply themselves,
      // so the loss is exactly quadratic in each single coordinate: central
      // differences are exact and every step sits at the rounding floor.
      CHECK(coarse < 1e-8);
      CHECK(mid < 1e-8);
      CHECK(fine < 1e-8);
    } else {
      CHECK(coarse > 1e-10);  // truncation visible above the rounding floor
      // error ~ step^2: one decade of step shrinks the error ~100x; the fine
      // step only has to stay below the coarse one (rounding floor territory)
      CHECK(mid < coarse / 20.0);
      CHECK(fine < coarse);
    }
  }
}

TEST_CASE("train runs one epoch per record and is bit-deterministic") {
  const Dataset ds = make_synthetic(4, 12, 2, 30);
  TrainConfig cfg = tiny_config(ModelKind::SimplE, 6);
  cfg.epochs = 1;
  cfg.lr = 0.01;
  const TrainResult once = train(cfg, ds);
  CHECK(once.history.size() == 1);
  CHECK_FALSE(once.diverged);

  cfg.epochs = 7;
  const TrainResult a = train(cfg, ds);
  const TrainResult b = train(cfg, ds);
  REQUIRE(a.history.size() == 7);
  for (std::size_t i = 0; i < a.params.tables.size(); ++i)
    CHECK(a.params.tables[i].second == b.params.tables[i].second);
}

TEST_CASE("train keeps transe rows unit after every epoch") {
  const Dataset ds = make_synthetic(8, 10, 2, 20);
  TrainConfig cfg = tiny_config(ModelKind::TransE, 4);
  cfg.epochs = 5;
  cfg.lr = 0.05;
  const TrainResult out = train(cfg, ds);
  for (const auto& [role, m] : out.params.tables)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      CHECK(std::abs(m.row(i).norm() - 1.0) < 1e-9);
}

TEST_CASE("final loss beats initial loss on the planted instance") {
  const Dataset ds = kge::testutil::planted_dataset(42);
  TrainConfig cfg = tiny_config(ModelKind::DistMult, 16);
  cfg.epochs = 120;
  cfg.lr = 0.01;
  cfg.c_neg = 1e-3;
  const TrainResult out = train(cfg, ds);
  REQUIRE_FALSE(out.diverged);
  CHECK(out.history.back().loss < out.history.front().loss);
}

TEST_CASE("divergence aborts with the last finite history") {
  const Dataset ds = make_synthetic(4, 12, 2, 30);
  TrainConfig cfg = tiny_config(ModelKind::DistMult, 6);
  cfg.epochs = 200;
  cfg.lr = 1e100;  // Adam steps are lr-bounded, so only an absurd rate overflows
  cfg.c_neg = 1.0;
  const TrainResult out = train(cfg, ds);
  CHECK(out.diverged);
  CHECK_FALSE(out.diagnostic.empty());
  CHECK(out.history.size() < 200);
  for (const EpochRecord& r : out.history) CHECK(std::isfinite(r.loss));
}

TEST_CASE("lr decay takes effect at mid-training") {
  const Dataset ds = make_synthetic(4, 12, 2, 30);
  TrainConfig cfg = tiny_config(ModelKind::DistMult, 6);
  cfg.epochs = 10;
  cfg.lr = 0.01;
  cfg.lr_decay = 0.1;
  const TrainResult decayed = train(cfg, ds);
  cfg.lr_decay = 1.0;
  const TrainResult plain = train(cfg, ds);
  bool differs = false;
  for (std::size_t i = 0; i < decayed.params.tables.size(); ++i)
    differs = differs || decayed.params.tables[i].second != plain.params.tables[i].second;
  CHECK(differs);
}

TEST_CASE("gram cache entries equal fresh cross_gram and column_sums") {
  const auto inst = tiny_instance(ModelKind::TransE, 5);
  const auto terms = square_terms(ModelKind::TransE);
  const GramCache cache = build_gram_cache(terms, inst.params);
  REQUIRE(cache.terms.size() == terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    for (const auto& entry : cache.terms[k].entries) {
      const Factor& f = terms[k].factors[entry.factor_index];
      if (const auto* g = std::get_if<GramFactor>(&f)) {
        CHECK(entry.mat ==
              cross_gram(inst.params.table(g->role_a), inst.params.table(g->role_b)));
      } else {
        const auto* m = std::get_if<MomentOuterFactor>(&f);
        REQUIRE(m != nullptr);
        CHECK(entry.sum_a == column_sums(inst.params.table(m->role_a)));
        CHECK(entry.sum_b == column_sums(inst.params.table(m->role_b)));
      }
    }
  }
}

TEST_CASE("naive loss is invariant under entity relabeling") {
  for (ModelKind kind : kAllKinds) {
    const auto inst = tiny_instance(kind, 130);
    const auto e = inst.params.entity_count;
    // relabel entity i -> e-1-i everywhere: parameter rows and triples
    ParameterSet relabeled = inst.params;
    for (auto& [role, t] : relabeled.tables)
      if (is_entity_role(role)) t = t.colwise().reverse().eval();
    Dataset ds2 = inst.dataset;
    for (Triple& t : ds2.train) {
      t.head = static_cast<std::int32_t>(e - 1 - t.head);
      t.tail = static_cast<std::int32_t>(e - 1 - t.tail);
    }
    const double a = oracle::naive_full_loss(kind, inst.params, inst.dataset, 1.0, 0.01);
    const double b = oracle::naive_full_loss(kind, relabeled, ds2, 1.0, 0.01);
    CHECK(oracle::rel_err(a, b) < 1e-12);
  }
}

TEST_CASE("config validation rejects bad values") {
  TrainConfig cfg;
  cfg.dim = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = TrainConfig{};
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = TrainConfig{};
  cfg.lr_decay = 1.5;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = TrainConfig{};
  cfg.c_neg = -1.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
}
