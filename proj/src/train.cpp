// SPDX-License-Identifier: Apache-2.0
#include "kge/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

namespace kge {

void TrainConfig::validate() const {
  if (dim < 1) throw UsageError("dim must be >= 1");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (!(lr > 0)) throw UsageError("lr must be > 0");
  if (!(lr_decay > 0) || lr_decay > 1.0) throw UsageError("lr-decay must be in (0, 1]");
  if (!(c_pos > 0)) throw UsageError("c-pos must be > 0");
  if (c_neg < 0) throw UsageError("c-neg must be >= 0");
  if (l2 < 0) throw UsageError("l2 must be >= 0");
  if (threads < 1) throw UsageError("threads must be >= 1");
  if (!(adam.beta1 >= 0 && adam.beta1 < 1) || !(adam.beta2 >= 0 && adam.beta2 < 1) ||
      !(adam.eps > 0))
    throw UsageError("adam hyperparameters out of range");
}

double effective_l2(ModelKind kind, const TrainConfig& config) {
  return kind == ModelKind::TransE ? 0.0 : config.l2;
}

namespace {

std::int64_t set_size(IndexSet set, const ParameterSet& p) {
  return set == IndexSet::Relations ? p.relation_count : p.entity_count;
}

double max_abs_param(const ParameterSet& p) {
  double m = 0.0;
  for (const auto& [role, t] : p.tables) m = std::max(m, t.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

GramCache build_gram_cache(const std::vector<TermSpec>& terms, const ParameterSet& params) {
  GramCache cache;
  cache.terms.resize(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    TermCache& tc = cache.terms[k];
    const TermSpec& term = terms[k];
    for (int fi = 0; fi < static_cast<int>(term.factors.size()); ++fi) {
      const Factor& f = term.factors[fi];
      if (const auto* g = std::get_if<GramFactor>(&f)) {
        TermCache::Entry e;
        e.factor_index = fi;
        e.mat = cross_gram(params.table(g->role_a), params.table(g->role_b));
        tc.entries.push_back(std::move(e));
      } else if (const auto* m = std::get_if<MomentOuterFactor>(&f)) {
        TermCache::Entry e;
        e.factor_index = fi;
        e.is_moment = true;
        e.sum_a = column_sums(params.table(m->role_a));
        e.sum_b = column_sums(params.table(m->role_b));
        e.mat = e.sum_a * e.sum_b.transpose();
        tc.entries.push_back(std::move(e));
      } else {
        tc.count_scale *= static_cast<double>(set_size(std::get<CountFactor>(f).set, params));
      }
    }
  }
  return cache;
}

double all_pairs_loss_cached(const std::vector<TermSpec>& terms, const GramCache& cache,
                             double c_neg) {
  double acc = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    std::vector<const Matrix*> mats;
    mats.reserve(cache.terms[k].entries.size());
    for (const auto& e : cache.terms[k].entries) mats.push_back(&e.mat);
    acc += terms[k].coefficient * cache.terms[k].count_scale * hadamard_sum(mats);
  }
  return c_neg * acc;
}

double all_pairs_loss(const ParameterSet& params, double c_neg,
                      const std::vector<TermSpec>& terms) {
  const GramCache cache = build_gram_cache(terms, params);
  return all_pairs_loss_cached(terms, cache, c_neg);
}

double all_pairs_loss(ModelKind kind, const ParameterSet& params, double c_neg) {
  return all_pairs_loss(params, c_neg, square_terms(kind));
}

namespace {

// Gradient of the all-pairs term through the cached factor matrices. For a
// Gram factor G = A^T B inside sum_ij W_ij G_ij the derivatives are
// d/dA = B W^T and d/dB = A W, with W the Hadamard product of the term's
// other factor matrices.
void accumulate_all_pairs_gradients(const std::vector<TermSpec>& terms, const GramCache& cache,
                                    const ParameterSet& params, double c_neg,
                                    std::map<std::string, Matrix>& grads) {
  const Eigen::Index d = params.dim;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const TermSpec& term = terms[k];
    const TermCache& tc = cache.terms[k];
    const double kappa = c_neg * term.coefficient * tc.count_scale;
    if (kappa == 0.0) continue;
    for (std::size_t e = 0; e < tc.entries.size(); ++e) {
      Matrix w = Matrix::Ones(d, d);
      for (std::size_t o = 0; o < tc.entries.size(); ++o)
        if (o != e) w.array() *= tc.entries[o].mat.array();
      const Factor& f = term.factors[tc.entries[e].factor_index];
      if (const auto* g = std::get_if<GramFactor>(&f)) {
        grads.at(g->role_a).noalias() += kappa * (params.table(g->role_b) * w.transpose());
        grads.at(g->role_b).noalias() += kappa * (params.table(g->role_a) * w);
      } else {
        const auto* m = std::get_if<MomentOuterFactor>(&f);
        const Vector wa = kappa * (w * tc.entries[e].sum_b);
        const Vector wb = kappa * (w.transpose() * tc.entries[e].sum_a);
        grads.at(m->role_a).rowwise() += wa.transpose();
        grads.at(m->role_b).rowwise() += wb.transpose();
      }
    }
  }
}

}  // namespace

// One contiguous chunk of sum_i [cq f^2 - 2 cl f]. Gradient accumulation is
// optional so the same loop serves loss-only evaluation.
double square_loss_accumulate(ModelKind kind, const ParameterSet& p, const Triple* begin,
                              const Triple* end, double c_quadratic, double c_linear,
                              std::map<std::string, Matrix>* grads) {
  const double cl = c_linear, cd = c_quadratic;
  double lp = 0.0;
  switch (kind) {
    case ModelKind::DistMult: {
      const Matrix& e = p.table("entity");
      const Matrix& r = p.table("relation");
      Matrix* ge = grads ? &grads->at("entity") : nullptr;
      Matrix* gr = grads ? &grads->at("relation") : nullptr;
      for (const Triple* t = begin; t != end; ++t) {
        const auto h = e.row(t->head).array();
        const auto rr = r.row(t->relation).array();
        const auto tt = e.row(t->tail).array();
        const double f = (h * rr * tt).sum();
        lp += cd * f * f - 2.0 * cl * f;
        if (ge) {
          const double a = 2.0 * cd * f - 2.0 * cl;
          ge->row(t->head).array() += a * (rr * tt);
          gr->row(t->relation).array() += a * (h * tt);
          ge->row(t->tail).array() += a * (h * rr);
        }
      }
      break;
    }
    case ModelKind::SimplE: {
      const Matrix& eh = p.table("entity_head");
      const Matrix& et = p.table("entity_tail");
      const Matrix& r = p.table("relation");
      const Matrix& ri = p.table("relation_inverse");
      Matrix* geh = grads ? &grads->at("entity_head") : nullptr;
      Matrix* get = grads ? &grads->at("entity_tail") : nullptr;
      Matrix* gr = grads ? &grads->at("relation") : nullptr;
      Matrix* gri = grads ? &grads->at("relation_inverse") : nullptr;
      for (const Triple* t = begin; t != end; ++t) {
        const auto hh = eh.row(t->head).array();
        const auto ht = eh.row(t->tail).array();
        const auto th = et.row(t->head).array();
        const auto tt = et.row(t->tail).array();
        const auto rr = r.row(t->relation).array();
        const auto rv = ri.row(t->relation).array();
        const double f = 0.5 * ((hh * rr * tt).sum() + (ht * rv * th).sum());
        lp += cd * f * f - 2.0 * cl * f;
        if (geh) {
          const double a = 0.5 * (2.0 * cd * f - 2.0 * cl);
          geh->row(t->head).array() += a * (rr * tt);
          gr->row(t->relation).array() += a * (hh * tt);
          get->row(t->tail).array() += a * (hh * rr);
          geh->row(t->tail).array() += a * (rv * th);
          gri->row(t->relation).array() += a * (ht * th);
          get->row(t->head).array() += a * (ht * rv);
        }
      }
      break;
    }
    case ModelKind::ComplEx: {
      const Matrix& ere = p.table("entity_re");
      const Matrix& eim = p.table("entity_im");
      const Matrix& rre = p.table("relation_re");
      const Matrix& rim = p.table("relation_im");
      Matrix* gere = grads ? &grads->at("entity_re") : nullptr;
      Matrix* geim = grads ? &grads->at("entity_im") : nullptr;
      Matrix* grre = grads ? &grads->at("relation_re") : nullptr;
      Matrix* grim = grads ? &grads->at("relation_im") : nullptr;
      for (const Triple* t = begin; t != end; ++t) {
        const auto hre = ere.row(t->head).array();
        const auto him = eim.row(t->head).array();
        const auto tre = ere.row(t->tail).array();
        const auto tim = eim.row(t->tail).array();
        const auto rr = rre.row(t->relation).array();
        const auto rw = rim.row(t->relation).array();
        const double f =
            (hre * rr * tre).sum() + (him * rr * tim).sum() + (hre * rw * tim).sum() -
            (him * rw * tre).sum();
        lp += cd * f * f - 2.0 * cl * f;
        if (gere) {
          const double a = 2.0 * cd * f - 2.0 * cl;
          gere->row(t->head).array() += a * (rr * tre + rw * tim);
          geim->row(t->head).array() += a * (rr * tim - rw * tre);
          grre->row(t->relation).array() += a * (hre * tre + him * tim);
          grim->row(t->relation).array() += a * (hre * tim - him * tre);
          gere->row(t->tail).array() += a * (hre * rr - him * rw);
          geim->row(t->tail).array() += a * (him * rr + hre * rw);
        }
      }
      break;
    }
    case ModelKind::TransE: {
      const Matrix& e = p.table("entity");
      const Matrix& r = p.table("relation");
      Matrix* ge = grads ? &grads->at("entity") : nullptr;
      Matrix* gr = grads ? &grads->at("relation") : nullptr;
      Eigen::Matrix<double, 1, Eigen::Dynamic> v(p.dim);
      for (const Triple* t = begin; t != end; ++t) {
        v = e.row(t->head) + r.row(t->relation) - e.row(t->tail);
        const double f = 1.0 - v.squaredNorm() / 3.0;
        lp += cd * f * f - 2.0 * cl * f;
        if (ge) {
          const double a = (2.0 * cd * f - 2.0 * cl) * (-2.0 / 3.0);
          ge->row(t->head) += a * v;
          gr->row(t->relation) += a * v;
          ge->row(t->tail) -= a * v;
        }
      }
      break;
    }
  }
  return lp;
}

std::map<std::string, Matrix> zero_gradients(const ParameterSet& p) {
  std::map<std::string, Matrix> g;
  for (const auto& [role, t] : p.tables) g.emplace(role, Matrix::Zero(t.rows(), t.cols()));
  return g;
}

namespace {

double positive_pass(ModelKind kind, const ParameterSet& p, const std::vector<Triple>& triples,
                     double cq, double cl, int threads, std::map<std::string, Matrix>* grads) {
  const std::size_t n = triples.size();
  if (n == 0) return 0.0;
  if (threads <= 1 || n < 4096) {
    return square_loss_accumulate(kind, p, triples.data(), triples.data() + n, cq, cl, grads);
  }
  const int workers = static_cast<int>(std::min<std::size_t>(threads, n));
  std::vector<double> lps(workers, 0.0);
  std::vector<std::map<std::string, Matrix>> gmaps;
  if (grads)
    for (int w = 0; w < workers; ++w) gmaps.push_back(zero_gradients(p));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
    pool.emplace_back([&, w, lo, hi] {
      lps[w] = square_loss_accumulate(kind, p, triples.data() + lo, triples.data() + hi, cq, cl,
                                      grads ? &gmaps[w] : nullptr);
    });
  }
  for (auto& th : pool) th.join();
  double lp = 0.0;
  for (int w = 0; w < workers; ++w) {
    lp += lps[w];
    if (grads)
      for (auto& [role, g] : *grads) g += gmaps[w].at(role);
  }
  return lp;
}

}  // namespace

double positive_loss(ModelKind kind, const ParameterSet& params, const Dataset& dataset,
                     double c_pos, double c_neg) {
  return positive_pass(kind, params, dataset.train, c_pos - c_neg, c_pos, 1, nullptr);
}

LossBreakdown loss_and_gradients(ModelKind kind, const ParameterSet& params,
                                 const Dataset& dataset, const TrainConfig& config,
                                 const std::vector<TermSpec>& terms) {
  if (params.kind != kind) throw DimensionError("loss_and_gradients: parameter set kind mismatch");
  LossBreakdown bd;
  bd.grads = zero_gradients(params);

  bd.lp = positive_pass(kind, params, dataset.train, config.c_pos - config.c_neg, config.c_pos,
                        config.threads, &bd.grads);

  const GramCache cache = build_gram_cache(terms, params);
  double acc = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    std::vector<const Matrix*> mats;
    for (const auto& e : cache.terms[k].entries) mats.push_back(&e.mat);
    const double v = terms[k].coefficient * cache.terms[k].count_scale * hadamard_sum(mats);
    if (!std::isfinite(v))
      throw NumericError("all-pairs term " + std::to_string(k) + " is non-finite; max |param| = " +
                         std::to_string(max_abs_param(params)));
    acc += v;
  }
  bd.la = config.c_neg * acc;
  accumulate_all_pairs_gradients(terms, cache, params, config.c_neg, bd.grads);

  const double l2 = effective_l2(kind, config);
  if (l2 > 0.0) {
    for (const auto& [role, t] : params.tables) {
      bd.l2_penalty += l2 * t.squaredNorm();
      bd.grads.at(role) += (2.0 * l2) * t;
    }
  }

  bd.constant = config.c_pos * static_cast<double>(dataset.train.size());
  bd.total = bd.lp + bd.la + bd.l2_penalty + bd.constant;
  if (!std::isfinite(bd.total))
    throw NumericError("loss is non-finite; max |param| = " +
                       std::to_string(max_abs_param(params)));
  return bd;
}

LossBreakdown loss_and_gradients(ModelKind kind, const ParameterSet& params,
                                 const Dataset& dataset, const TrainConfig& config) {
  return loss_and_gradients(kind, params, dataset, config, square_terms(kind));
}

double loss_value(ModelKind kind, const ParameterSet& params, const Dataset& dataset,
                  const TrainConfig& config, const std::vector<TermSpec>& terms) {
  const double lp = positive_pass(kind, params, dataset.train, config.c_pos - config.c_neg,
                                  config.c_pos, 1, nullptr);
  const double la = all_pairs_loss(params, config.c_neg, terms);
  double l2p = 0.0;
  const double l2 = effective_l2(kind, config);
  if (l2 > 0.0)
    for (const auto& [role, t] : params.tables) l2p += l2 * t.squaredNorm();
  return lp + la + l2p + config.c_pos * static_cast<double>(dataset.train.size());
}

TrainResult train(const TrainConfig& config, const Dataset& dataset) {
  config.validate();
  TrainResult out;
  out.params = init_params(config.kind, dataset.entity_count, dataset.relation_count, config.dim,
                           config.seed);
  const std::vector<TermSpec> terms = square_terms(config.kind);

  std::map<std::string, AdamState> states;
  for (const auto& [role, t] : out.params.tables)
    states.emplace(role, make_adam_state(t.rows(), t.cols()));

  double current_lr = config.lr;
  for (std::int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    LossBreakdown bd;
    try {
      bd = loss_and_gradients(config.kind, out.params, dataset, config, terms);
      AdamHyper hp = config.adam;
      hp.lr = current_lr;
      for (auto& [role, table] : out.params.tables)
        adam_step(table, bd.grads.at(role), states.at(role), hp, role);
      if (config.kind == ModelKind::TransE) project_unit_norm(out.params);
    } catch (const NumericError& err) {
      out.diverged = true;
      out.diagnostic = "epoch " + std::to_string(epoch) + ": " + err.what();
      break;
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double sq = 0.0;
    for (const auto& [role, t] : out.params.tables) sq += t.squaredNorm();
    out.history.push_back(EpochRecord{epoch, bd.total, bd.lp, bd.la, seconds, std::sqrt(sq)});

    if (epoch == (config.epochs + 1) / 2) current_lr *= config.lr_decay;
  }
  return out;
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,loss,lp,la,seconds\n";
  out.precision(17);
  for (const EpochRecord& r : history)
    out << r.epoch << "," << r.loss << "," << r.lp << "," << r.la << "," << r.seconds << "\n";
}

}  // namespace kge
