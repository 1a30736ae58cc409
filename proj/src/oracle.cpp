// SPDX-License-Identifier: Apache-2.0
#include "kge/oracle.hpp"

#include <cmath>
#include <unordered_set>

namespace kge::oracle {

namespace {

void check_guard(const ParameterSet& p, std::int64_t max_e, std::int64_t max_r,
                 std::int64_t max_d, const char* who) {
  if (p.entity_count > max_e || p.relation_count > max_r || p.dim > max_d)
    throw UsageError(std::string(who) + ": size guard exceeded (|E|=" +
                     std::to_string(p.entity_count) + ", |R|=" +
                     std::to_string(p.relation_count) + ", d=" + std::to_string(p.dim) + ")");
}

std::int64_t pack(const Triple& t, const ParameterSet& p) {
  return (static_cast<std::int64_t>(t.head) * p.relation_count + t.relation) * p.entity_count +
         t.tail;
}

}  // namespace

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double naive_full_loss(ModelKind kind, const ParameterSet& params, const Dataset& dataset,
                       double c_pos, double c_neg) {
  check_guard(params, kMaxEntities, kMaxRelations, kMaxDim, "naive_full_loss");
  std::unordered_set<std::int64_t> positives;
  positives.reserve(dataset.train.size() * 2);
  for (const Triple& t : dataset.train) positives.insert(pack(t, params));

  double acc = 0.0;
  Triple t;
  for (t.head = 0; t.head < params.entity_count; ++t.head) {
    for (t.relation = 0; t.relation < params.relation_count; ++t.relation) {
      for (t.tail = 0; t.tail < params.entity_count; ++t.tail) {
        const double fhat = score(kind, params, t);
        const bool pos = positives.count(pack(t, params)) > 0;
        const double f = pos ? 1.0 : 0.0;
        const double c = pos ? c_pos : c_neg;
        acc += c * (f - fhat) * (f - fhat);
      }
    }
  }
  return acc;
}

double naive_square_sum(ModelKind kind, const ParameterSet& params) {
  check_guard(params, kBenchMaxEntities, kBenchMaxRelations, kBenchMaxDim, "naive_square_sum");
  double acc = 0.0;
  Triple t;
  for (t.head = 0; t.head < params.entity_count; ++t.head) {
    for (t.relation = 0; t.relation < params.relation_count; ++t.relation) {
      for (t.tail = 0; t.tail < params.entity_count; ++t.tail) {
        const double fhat = score(kind, params, t);
        acc += fhat * fhat;
      }
    }
  }
  return acc;
}

std::map<std::string, Matrix> fd_gradient(ModelKind kind, const ParameterSet& params,
                                          const Dataset& dataset, const TrainConfig& config,
                                          double step, FdPath path) {
  check_guard(params, kMaxEntities, kMaxRelations, kMaxDim, "fd_gradient");
  if (step < 1e-7 || step > 1e-3) throw UsageError("fd_gradient: step outside [1e-7, 1e-3]");

  const std::vector<TermSpec> terms = square_terms(kind);
  ParameterSet work = params;
  const double l2 = effective_l2(kind, config);

  const auto eval = [&]() -> double {
    if (path == FdPath::Efficient) return loss_value(kind, work, dataset, config, terms);
    double l2p = 0.0;
    if (l2 > 0.0)
      for (const auto& [role, t] : work.tables) l2p += l2 * t.squaredNorm();
    return naive_full_loss(kind, work, dataset, config.c_pos, config.c_neg) + l2p;
  };

  std::map<std::string, Matrix> grads;
  for (auto& [role, table] : work.tables) {
    Matrix g(table.rows(), table.cols());
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
      for (Eigen::Index j = 0; j < table.cols(); ++j) {
        const double saved = table(i, j);
        table(i, j) = saved + step;
        const double up = eval();
        table(i, j) = saved - step;
        const double down = eval();
        table(i, j) = saved;
        g(i, j) = (up - down) / (2.0 * step);
      }
    }
    grads.emplace(role, std::move(g));
  }
  return grads;
}

}  // namespace kge::oracle
