// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kge/data.hpp"
#include "kge/linalg.hpp"

namespace kge {

enum class ModelKind { DistMult, SimplE, ComplEx, TransE };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Named dense parameter tables for one model. Entity-role tables have |E|
/// rows, relation-role tables |R| rows, all share column count d. Tables are
/// kept in a fixed per-kind role order so iteration is deterministic.
struct ParameterSet {
  ModelKind kind = ModelKind::DistMult;
  std::int64_t entity_count = 0;
  std::int64_t relation_count = 0;
  std::int64_t dim = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, Matrix>> tables;

  Matrix& table(const std::string& role);
  const Matrix& table(const std::string& role) const;
  bool has_table(const std::string& role) const;
};

/// Role names in canonical order for a model kind.
const std::vector<std::string>& role_names(ModelKind kind);
bool is_entity_role(const std::string& role);

/// Uniform init on [-b, b] with b = sqrt(6 / (rows + cols)), deterministic
/// under the seed across platforms. TransE tables are projected to unit row
/// norm afterwards.
ParameterSet init_params(ModelKind kind, std::int64_t entity_count, std::int64_t relation_count,
                         std::int64_t dim, std::uint64_t seed);

/// Plausibility score of a single triple.
///   DistMult  sum_i e_h[i] r[i] e_t[i]
///   SimplE    (<eh_h, r, et_t> + <eh_t, r_inv, et_h>) / 2
///   ComplEx   Re(<h, r, conj(t)>) over paired real/imaginary tables
///   TransE    1 - |h + r - t|^2 / 3
double score(ModelKind kind, const ParameterSet& params, const Triple& triple);

/// Scores of all candidate tails for fixed (head, relation), or all candidate
/// heads for fixed (relation, tail). Matches score() entry by entry.
Vector score_tails(ModelKind kind, const ParameterSet& params, std::int32_t head,
                   std::int32_t relation);
Vector score_heads(ModelKind kind, const ParameterSet& params, std::int32_t relation,
                   std::int32_t tail);

/// Rescales every row of every table to Euclidean norm 1. Rejects zero rows.
void project_unit_norm(ParameterSet& params);

// --- Symbolic expansion of the squared score -------------------------------
//
// Each summand of a score is a trilinear form over one head slot, one
// relation slot and one tail slot. Squaring and summing over all of
// E x R x E turns a pair of summands into a product of three per-slot
// d-by-d aggregates; each aggregate is one of the factor kinds below.

enum class IndexSet { HeadEntities, Relations, TailEntities };

/// Aggregate sum_n A[n][i] B[n][j] over one index set: a d-by-d cross-Gram
/// of the two role tables.
struct GramFactor {
  std::string role_a;
  std::string role_b;
  IndexSet set;
};

/// Outer product S_a S_b^T of two column-sum vectors, consuming two index
/// sets (the i side and the j side come from different slots).
struct MomentOuterFactor {
  std::string role_a;
  IndexSet set_a;
  std::string role_b;
  IndexSet set_b;
};

/// The scalar |set|, for slots absent from both summands.
struct CountFactor {
  IndexSet set;
};

using Factor = std::variant<GramFactor, MomentOuterFactor, CountFactor>;

/// One product-of-sums summand of sum_{h,r,t} score(h,r,t)^2.
struct TermSpec {
  double coefficient = 1.0;
  std::vector<Factor> factors;
};

/// Complete expansion of the squared score: DistMult 1 term, SimplE 3,
/// TransE 6, ComplEx 10. Terms are generated from the per-model signed
/// summand lists, never hand-enumerated. For TransE the expansion is exact
/// on unit-norm parameters.
std::vector<TermSpec> square_terms(ModelKind kind);

/// Checks that every term consumes each index set exactly once.
void validate_terms(const std::vector<TermSpec>& terms);

/// Provider hook so verification can run against a perturbed expansion.
using TermProvider = std::vector<TermSpec> (*)(ModelKind);

// --- Checkpoint format ------------------------------------------------------
// A directory holding manifest.json plus one little-endian float64 row-major
// binary file per role table.

void save_checkpoint(const ParameterSet& params, const std::filesystem::path& dir);
ParameterSet load_checkpoint(const std::filesystem::path& dir);

}  // namespace kge
