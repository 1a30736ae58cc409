// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "kge/errors.hpp"

namespace kge {

struct Triple {
  std::int32_t head = 0;
  std::int32_t relation = 0;
  std::int32_t tail = 0;
  friend bool operator==(const Triple&, const Triple&) = default;
};

/// Integer-encoded knowledge graph with train/valid/test splits.
/// Name dictionaries are kept when loaded from disk; synthetic datasets
/// leave them empty. All computation is index-based.
struct Dataset {
  std::int64_t entity_count = 0;
  std::int64_t relation_count = 0;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  std::vector<std::string> entity_names;
  std::vector<std::string> relation_names;
};

/// Loads the OpenKE directory layout: entity2id.txt, relation2id.txt,
/// train2id.txt, test2id.txt, optional valid2id.txt. Each file starts with a
/// count line; triple lines are "h t r" (tail before relation). Malformed
/// lines, out-of-range indices, count mismatches and duplicate triples are
/// reported as DataError with file and line number.
Dataset load_dataset(const std::filesystem::path& dir);

/// Positive adjacency over a triple set: (h,r) -> sorted tails and
/// (t,r) -> sorted heads. Immutable after construction.
struct AdjacencyIndex {
  std::int64_t entity_count = 0;
  std::int64_t relation_count = 0;
  std::unordered_map<std::int64_t, std::vector<std::int32_t>> tails_by_head_rel;
  std::unordered_map<std::int64_t, std::vector<std::int32_t>> heads_by_tail_rel;

  const std::vector<std::int32_t>* tails(std::int32_t head, std::int32_t rel) const;
  const std::vector<std::int32_t>* heads(std::int32_t tail, std::int32_t rel) const;
  bool contains(const Triple& t) const;
  std::size_t triple_count() const;
};

AdjacencyIndex build_index(const std::vector<Triple>& triples, std::int64_t entity_count,
                           std::int64_t relation_count);

/// Flattens the index back to a triple list (sorted by head, relation, tail).
std::vector<Triple> enumerate_index(const AdjacencyIndex& index);

/// Deterministic random dataset: positive_count distinct triples drawn
/// uniformly from E x R x E under the given seed. All triples land in the
/// train split. Rejects positive_count > |E|^2 |R|.
Dataset make_synthetic(std::uint64_t seed, std::int64_t entity_count,
                       std::int64_t relation_count, std::int64_t positive_count);

}  // namespace kge
