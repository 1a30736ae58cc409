// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kge/data.hpp"
#include "kge/models.hpp"

namespace kge {

struct TrainConfig {
  ModelKind kind = ModelKind::DistMult;
  std::int64_t dim = 200;
  std::int64_t epochs = 2000;
  double lr = 1e-4;
  double lr_decay = 1.0;  // multiplicative, applied once after epoch ceil(epochs/2)
  double c_pos = 1.0;
  double c_neg = 1e-3;
  double l2 = 0.0;  // penalty for DistMult/SimplE/ComplEx; TransE uses projection instead
  std::uint64_t seed = 0;
  AdamHyper adam;
  int threads = 1;
  bool deterministic = true;

  void validate() const;  // throws UsageError
};

struct EpochRecord {
  std::int64_t epoch = 0;  // 1-based
  double loss = 0.0;       // lp + la + l2 penalty + constant
  double lp = 0.0;
  double la = 0.0;
  double seconds = 0.0;
  double param_norm = 0.0;
};
using TrainHistory = std::vector<EpochRecord>;

/// Cached factor matrices for one expansion term, rebuilt each epoch.
/// Shared by the loss value and the gradient pass.
struct TermCache {
  struct Entry {
    int factor_index = 0;  // position within TermSpec::factors
    Matrix mat;            // cross-Gram, or S_a S_b^T for moment factors
    Vector sum_a, sum_b;   // column sums behind a moment factor (empty otherwise)
    bool is_moment = false;
  };
  double count_scale = 1.0;  // product of CountFactor set sizes
  std::vector<Entry> entries;
};

struct GramCache {
  std::vector<TermCache> terms;
};

GramCache build_gram_cache(const std::vector<TermSpec>& terms, const ParameterSet& params);

/// L^P: sum over training triples of (c+ - c-) f^2 - 2 c+ f.
double positive_loss(ModelKind kind, const ParameterSet& params, const Dataset& dataset,
                     double c_pos, double c_neg);

/// sum_i [cq f(t_i)^2 - 2 cl f(t_i)] plus gradients, over an explicit triple
/// list. L^P is cq = c+ - c-, cl = c+. The sampled baseline reuses it with
/// cq = cl = c+ for positives (constant c+ per triple added by the caller)
/// and cq = c-, cl = 0 for sampled negatives.
double square_loss_accumulate(ModelKind kind, const ParameterSet& params, const Triple* begin,
                              const Triple* end, double c_quadratic, double c_linear,
                              std::map<std::string, Matrix>* grads);

std::map<std::string, Matrix> zero_gradients(const ParameterSet& params);

/// L^A: c- * sum over all (h,r,t) in E x R x E of f^2, evaluated through the
/// term expansion in O(d^2 (|E| + |R|)). For TransE the value matches the
/// score-based sum only on unit-norm parameters.
double all_pairs_loss(ModelKind kind, const ParameterSet& params, double c_neg);
double all_pairs_loss(const ParameterSet& params, double c_neg,
                      const std::vector<TermSpec>& terms);
double all_pairs_loss_cached(const std::vector<TermSpec>& terms, const GramCache& cache,
                             double c_neg);

struct LossBreakdown {
  double total = 0.0;  // lp + la + l2_penalty + constant
  double lp = 0.0;
  double la = 0.0;
  double l2_penalty = 0.0;
  double constant = 0.0;  // c+ * |train|, reported but never differentiated
  std::map<std::string, Matrix> grads;
};

/// Full-batch loss and exact analytic gradients for every table.
LossBreakdown loss_and_gradients(ModelKind kind, const ParameterSet& params,
                                 const Dataset& dataset, const TrainConfig& config);
LossBreakdown loss_and_gradients(ModelKind kind, const ParameterSet& params,
                                 const Dataset& dataset, const TrainConfig& config,
                                 const std::vector<TermSpec>& terms);

/// Loss value only, along the same expression loss_and_gradients
/// differentiates. Used by finite-difference checks.
double loss_value(ModelKind kind, const ParameterSet& params, const Dataset& dataset,
                  const TrainConfig& config, const std::vector<TermSpec>& terms);

/// The l2 coefficient actually applied: zero for TransE, whose rows are
/// projected to unit norm instead.
double effective_l2(ModelKind kind, const TrainConfig& config);

struct TrainResult {
  ParameterSet params;
  TrainHistory history;
  bool diverged = false;
  std::string diagnostic;
};

/// Full-batch non-sampling training loop. Deterministic under the seed.
TrainResult train(const TrainConfig& config, const Dataset& dataset);

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);

}  // namespace kge
