// SPDX-License-Identifier: Apache-2.0
#include "kge/models.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <optional>
#include <random>

namespace kge {

static_assert(std::endian::native == std::endian::little,
              "checkpoint files are little-endian; big-endian hosts are unsupported");

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::DistMult: return "distmult";
    case ModelKind::SimplE: return "simple";
    case ModelKind::ComplEx: return "complex";
    case ModelKind::TransE: return "transe";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "distmult") return ModelKind::DistMult;
  if (name == "simple") return ModelKind::SimplE;
  if (name == "complex") return ModelKind::ComplEx;
  if (name == "transe") return ModelKind::TransE;
  throw UsageError("unknown model kind: " + name);
}

const std::vector<std::string>& role_names(ModelKind kind) {
  static const std::vector<std::string> distmult = {"entity", "relation"};
  static const std::vector<std::string> simple = {"entity_head", "entity_tail", "relation",
                                                  "relation_inverse"};
  static const std::vector<std::string> complex_roles = {"entity_re", "entity_im", "relation_re",
                                                         "relation_im"};
  static const std::vector<std::string> transe = {"entity", "relation"};
  switch (kind) {
    case ModelKind::DistMult: return distmult;
    case ModelKind::SimplE: return simple;
    case ModelKind::ComplEx: return complex_roles;
    case ModelKind::TransE: return transe;
  }
  return distmult;
}

bool is_entity_role(const std::string& role) { return role.rfind("entity", 0) == 0; }

Matrix& ParameterSet::table(const std::string& role) {
  for (auto& [name, m] : tables)
    if (name == role) return m;
  throw DimensionError("no table for role '" + role + "' in model " + to_string(kind));
}

const Matrix& ParameterSet::table(const std::string& role) const {
  for (const auto& [name, m] : tables)
    if (name == role) return m;
  throw DimensionError("no table for role '" + role + "' in model " + to_string(kind));
}

bool ParameterSet::has_table(const std::string& role) const {
  for (const auto& [name, m] : tables)
    if (name == role) return true;
  return false;
}

namespace {

// Platform-stable uniform double in [0, 1).
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_triple(const ParameterSet& p, const Triple& t) {
  if (t.head < 0 || t.head >= p.entity_count || t.tail < 0 || t.tail >= p.entity_count ||
      t.relation < 0 || t.relation >= p.relation_count)
    throw DataError("triple index out of range for parameter set");
}

}  // namespace

ParameterSet init_params(ModelKind kind, std::int64_t entity_count, std::int64_t relation_count,
                         std::int64_t dim, std::uint64_t seed) {
  if (entity_count < 1 || relation_count < 1 || dim < 1)
    throw UsageError("init_params: entity_count, relation_count and dim must be positive");
  ParameterSet p;
  p.kind = kind;
  p.entity_count = entity_count;
  p.relation_count = relation_count;
  p.dim = dim;
  p.seed = seed;
  std::mt19937_64 rng(seed);
  for (const std::string& role : role_names(kind)) {
    const std::int64_t rows = is_entity_role(role) ? entity_count : relation_count;
    const double b = std::sqrt(6.0 / static_cast<double>(rows + dim));
    Matrix m(rows, dim);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = (2.0 * uniform01(rng) - 1.0) * b;
    p.tables.emplace_back(role, std::move(m));
  }
  if (kind == ModelKind::TransE) project_unit_norm(p);
  return p;
}

double score(ModelKind kind, const ParameterSet& p, const Triple& t) {
  check_triple(p, t);
  switch (kind) {
    case ModelKind::DistMult: {
      const auto& e = p.table("entity");
      const auto& r = p.table("relation");
      return (e.row(t.head).array() * r.row(t.relation).array() * e.row(t.tail).array()).sum();
    }
    case ModelKind::SimplE: {
      const auto& eh = p.table("entity_head");
      const auto& et = p.table("entity_tail");
      const auto& r = p.table("relation");
      const auto& ri = p.table("relation_inverse");
      const double fwd =
          (eh.row(t.head).array() * r.row(t.relation).array() * et.row(t.tail).array()).sum();
      const double inv =
          (eh.row(t.tail).array() * ri.row(t.relation).array() * et.row(t.head).array()).sum();
      return 0.5 * (fwd + inv);
    }
    case ModelKind::ComplEx: {
      const auto& ere = p.table("entity_re");
      const auto& eim = p.table("entity_im");
      const auto& rre = p.table("relation_re");
      const auto& rim = p.table("relation_im");
      const auto hre = ere.row(t.head).array(), him = eim.row(t.head).array();
      const auto tre = ere.row(t.tail).array(), tim = eim.row(t.tail).array();
      const auto rr = rre.row(t.relation).array(), riw = rim.row(t.relation).array();
      return (hre * rr * tre).sum() + (him * rr * tim).sum() + (hre * riw * tim).sum() -
             (him * riw * tre).sum();
    }
    case ModelKind::TransE: {
      const auto& e = p.table("entity");
      const auto& r = p.table("relation");
      const double sq =
          (e.row(t.head) + r.row(t.relation) - e.row(t.tail)).squaredNorm();
      return 1.0 - sq / 3.0;
    }
  }
  throw NumericError("score: unhandled model kind");
}

Vector score_tails(ModelKind kind, const ParameterSet& p, std::int32_t head,
                   std::int32_t relation) {
  check_triple(p, Triple{head, relation, 0});
  switch (kind) {
    case ModelKind::DistMult: {
      const auto& e = p.table("entity");
      const auto& r = p.table("relation");
      Vector w = (e.row(head).array() * r.row(relation).array()).matrix().transpose();
      return e * w;
    }
    case ModelKind::SimplE: {
      const auto& eh = p.table("entity_head");
      const auto& et = p.table("entity_tail");
      const auto& r = p.table("relation");
      const auto& ri = p.table("relation_inverse");
      Vector wf = (eh.row(head).array() * r.row(relation).array()).matrix().transpose();
      Vector wi = (ri.row(relation).array() * et.row(head).array()).matrix().transpose();
      return 0.5 * (et * wf + eh * wi);
    }
    case ModelKind::ComplEx: {
      const auto& ere = p.table("entity_re");
      const auto& eim = p.table("entity_im");
      const auto& rre = p.table("relation_re");
      const auto& rim = p.table("relation_im");
      const auto hre = ere.row(head).array(), him = eim.row(head).array();
      const auto rr = rre.row(relation).array(), riw = rim.row(relation).array();
      Vector wre = (rr * hre - riw * him).matrix().transpose();
      Vector wim = (rr * him + riw * hre).matrix().transpose();
      return ere * wre + eim * wim;
    }
    case ModelKind::TransE: {
      const auto& e = p.table("entity");
      const auto& r = p.table("relation");
      Vector q = (e.row(head) + r.row(relation)).transpose();
      Vector dots = e * q;
      Vector norms = e.rowwise().squaredNorm();
      return (1.0 - q.squaredNorm() / 3.0) +
             ((2.0 / 3.0) * dots - norms / 3.0).array();
    }
  }
  throw NumericError("score_tails: unhandled model kind");
}

Vector score_heads(ModelKind kind, const ParameterSet& p, std::int32_t relation,
                   std::int32_t tail) {
  check_triple(p, Triple{0, relation, tail});
  switch (kind) {
    case ModelKind::DistMult: {
      const auto& e = p.table("entity");
      const auto& r = p.table("relation");
      Vector w = (r.row(relation).array() * e.row(tail).array()).matrix().transpose();
      return e * w;
    }
    case ModelKind::SimplE: {
      const auto& eh = p.table("entity_head");
      const auto& et = p.table("entity_tail");
      const auto& r = p.table("relation");
      const auto& ri = p.table("relation_inverse");
      Vector wf = (r.row(relation).array() * et.row(tail).array()).matrix().transpose();
      Vector wi = (eh.row(tail).array() * ri.row(relation).array()).matrix().transpose();
      return 0.5 * (eh * wf + et * wi);
    }
    case ModelKind::ComplEx: {
      const auto& ere = p.table("entity_re");
      const auto& eim = p.table("entity_im");
      const auto& rre = p.table("relation_re");
      const auto& rim = p.table("relation_im");
      const auto tre = ere.row(tail).array(), tim = eim.row(tail).array();
      const auto rr = rre.row(relation).array(), riw = rim.row(relation).array();
      Vector wre = (rr * tre + riw * tim).matrix().transpose();
      Vector wim = (rr * tim - riw * tre).matrix().transpose();
      return ere * wre + eim * wim;
    }
    case ModelKind::TransE: {
      const auto& e = p.table("entity");
      const auto& r = p.table("relation");
      Vector q = (r.row(relation) - e.row(tail)).transpose();
      Vector dots = e * q;
      Vector norms = e.rowwise().squaredNorm();
      return (1.0 - q.squaredNorm() / 3.0) +
             (-(2.0 / 3.0) * dots - norms / 3.0).array();
    }
  }
  throw NumericError("score_heads: unhandled model kind");
}

void project_unit_norm(ParameterSet& p) {
  for (auto& [role, m] : p.tables) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double n = m.row(i).norm();
      if (n == 0.0)
        throw NumericError("project_unit_norm: zero row " + std::to_string(i) + " in table " +
                           role);
      m.row(i) /= n;
    }
  }
}

// --- square_terms -----------------------------------------------------------

namespace {

// One trilinear summand of a score: a role table per occupied slot, or
// nothing when the slot does not appear (TransE pair products).
struct Summand {
  double coefficient = 1.0;
  std::optional<std::string> head;
  std::optional<std::string> rel;
  std::optional<std::string> tail;

  const std::optional<std::string>& slot(IndexSet set) const {
    switch (set) {
      case IndexSet::HeadEntities: return head;
      case IndexSet::Relations: return rel;
      case IndexSet::TailEntities: return tail;
    }
    return head;
  }
};

std::vector<Summand> score_summands(ModelKind kind) {
  switch (kind) {
    case ModelKind::DistMult:
      return {{1.0, "entity", "relation", "entity"}};
    case ModelKind::SimplE:
      return {{0.5, "entity_head", "relation", "entity_tail"},
              {0.5, "entity_tail", "relation_inverse", "entity_head"}};
    case ModelKind::ComplEx:
      return {{1.0, "entity_re", "relation_re", "entity_re"},
              {1.0, "entity_im", "relation_re", "entity_im"},
              {1.0, "entity_re", "relation_im", "entity_im"},
              {-1.0, "entity_im", "relation_im", "entity_re"}};
    case ModelKind::TransE:
      // On unit-norm rows: score = (2/3) (h.t) + (2/3) (r.t) - (2/3) (r.h).
      return {{2.0 / 3.0, "entity", std::nullopt, "entity"},
              {2.0 / 3.0, std::nullopt, "relation", "entity"},
              {-2.0 / 3.0, "entity", "relation", std::nullopt}};
  }
  return {};
}

constexpr std::array<IndexSet, 3> kAllSets = {IndexSet::HeadEntities, IndexSet::Relations,
                                              IndexSet::TailEntities};

TermSpec pair_term(const Summand& a, const Summand& b, bool cross) {
  TermSpec term;
  term.coefficient = a.coefficient * b.coefficient * (cross ? 2.0 : 1.0);
  std::optional<std::pair<std::string, IndexSet>> moment_i, moment_j;
  for (IndexSet set : kAllSets) {
    const auto& ra = a.slot(set);
    const auto& rb = b.slot(set);
    if (ra && rb) {
      term.factors.push_back(GramFactor{*ra, *rb, set});
    } else if (ra) {
      moment_i = {*ra, set};
    } else if (rb) {
      moment_j = {*rb, set};
    } else {
      term.factors.push_back(CountFactor{set});
    }
  }
  if (moment_i.has_value() != moment_j.has_value())
    throw NumericError("square_terms: unpaired single-sided moment in expansion");
  if (moment_i)
    term.factors.push_back(
        MomentOuterFactor{moment_i->first, moment_i->second, moment_j->first, moment_j->second});
  return term;
}

}  // namespace

std::vector<TermSpec> square_terms(ModelKind kind) {
  const std::vector<Summand> summands = score_summands(kind);
  std::vector<TermSpec> terms;
  for (std::size_t i = 0; i < summands.size(); ++i)
    for (std::size_t j = i; j < summands.size(); ++j)
      terms.push_back(pair_term(summands[i], summands[j], i != j));
  validate_terms(terms);
  return terms;
}

void validate_terms(const std::vector<TermSpec>& terms) {
  for (const TermSpec& term : terms) {
    std::array<int, 3> used = {0, 0, 0};
    const auto mark = [&used](IndexSet s) { used[static_cast<int>(s)] += 1; };
    for (const Factor& f : term.factors) {
      if (const auto* g = std::get_if<GramFactor>(&f)) {
        mark(g->set);
      } else if (const auto* m = std::get_if<MomentOuterFactor>(&f)) {
        mark(m->set_a);
        mark(m->set_b);
      } else {
        mark(std::get<CountFactor>(f).set);
      }
    }
    if (used != std::array<int, 3>{1, 1, 1})
      throw NumericError("TermSpec does not consume each index set exactly once");
  }
}

}  // namespace kge
