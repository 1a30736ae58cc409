// SPDX-License-Identifier: Apache-2.0
#include "kge/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "kge/oracle.hpp"

namespace kge {

namespace {

constexpr std::array<ModelKind, 4> kAllKinds = {ModelKind::DistMult, ModelKind::SimplE,
                                                ModelKind::ComplEx, ModelKind::TransE};

struct ScaleSpec {
  int instances;
  std::int64_t max_entities, max_relations, max_dim;
};

ScaleSpec scale_spec(VerifyScale scale) {
  if (scale == VerifyScale::Tiny) return {3, 10, 3, 4};
  return {6, 30, 5, 8};
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  return x;
}

struct Instance {
  ParameterSet params;
  Dataset dataset;
};

Instance make_instance(ModelKind kind, const ScaleSpec& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::int64_t e = 4 + static_cast<std::int64_t>(rng() % (s.max_entities - 3));
  const std::int64_t r = 1 + static_cast<std::int64_t>(rng() % s.max_relations);
  const std::int64_t d = 2 + static_cast<std::int64_t>(rng() % (s.max_dim - 1));
  const std::int64_t positives = std::min<std::int64_t>(e * r, 2 * e);
  Instance inst;
  inst.params = init_params(kind, e, r, d, mix(seed, 1));
  inst.dataset = make_synthetic(mix(seed, 2), e, r, positives);
  return inst;
}

}  // namespace

std::vector<PropertyResult> verify_properties(VerifyScale scale, std::uint64_t seed,
                                              TermProvider terms) {
  const ScaleSpec s = scale_spec(scale);
  std::vector<PropertyResult> results;

  for (ModelKind kind : kAllKinds) {
    const std::vector<TermSpec> term_list = terms(kind);

    // Eq-split identity: naive whole-graph loss equals L^P + L^A + constant.
    {
      PropertyResult pr{.property = "loss-identity", .kind = kind, .tolerance = 1e-8};
      for (int i = 0; i < s.instances; ++i) {
        const Instance inst = make_instance(kind, s, mix(seed, 100 + i));
        const double c_pos = 1.0, c_neg = 1e-3;
        const double naive =
            oracle::naive_full_loss(kind, inst.params, inst.dataset, c_pos, c_neg);
        const double split = positive_loss(kind, inst.params, inst.dataset, c_pos, c_neg) +
                             all_pairs_loss(inst.params, c_neg, term_list) +
                             c_pos * static_cast<double>(inst.dataset.train.size());
        pr.observed = std::max(pr.observed, oracle::rel_err(split, naive));
      }
      pr.pass = pr.observed <= pr.tolerance;
      results.push_back(pr);
    }

    // Expansion identity: sum over all triples of score^2 equals the term
    // evaluation.
    {
      PropertyResult pr{.property = "square-expansion", .kind = kind, .tolerance = 1e-8};
      for (int i = 0; i < s.instances; ++i) {
        const Instance inst = make_instance(kind, s, mix(seed, 200 + i));
        const double naive = oracle::naive_square_sum(kind, inst.params);
        const double efficient = all_pairs_loss(inst.params, 1.0, term_list);
        pr.observed = std::max(pr.observed, oracle::rel_err(efficient, naive));
      }
      pr.pass = pr.observed <= pr.tolerance;
      results.push_back(pr);
    }

    // Analytic gradients against central finite differences of the trainer
    // loss (step 1e-5).
    {
      PropertyResult pr{.property = "gradient-fd", .kind = kind, .tolerance = 1e-4};
      for (int i = 0; i < s.instances; ++i) {
        const Instance inst = make_instance(kind, s, mix(seed, 300 + i));
        TrainConfig cfg;
        cfg.kind = kind;
        cfg.dim = inst.params.dim;
        cfg.c_pos = 1.0;
        cfg.c_neg = 0.01;
        cfg.l2 = 1e-3;
        const auto analytic = loss_and_gradients(kind, inst.params, inst.dataset, cfg, term_list);
        const auto fd = oracle::fd_gradient(kind, inst.params, inst.dataset, cfg, 1e-5);
        for (const auto& [role, g] : analytic.grads) {
          const Matrix& f = fd.at(role);
          for (Eigen::Index a = 0; a < g.rows(); ++a)
            for (Eigen::Index b = 0; b < g.cols(); ++b)
              pr.observed = std::max(pr.observed, oracle::rel_err(g(a, b), f(a, b)));
        }
      }
      pr.pass = pr.observed <= pr.tolerance;
      results.push_back(pr);
    }
  }
  return results;
}

}  // namespace kge
