// SPDX-License-Identifier: Apache-2.0
#include "kge/data.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

namespace kge {
namespace {

std::int64_t pack(std::int64_t h, std::int64_t r, std::int64_t t, std::int64_t entity_count,
                  std::int64_t relation_count) {
  return (h * relation_count + r) * entity_count + t;
}

std::int64_t pack_pair(std::int64_t e, std::int64_t r, std::int64_t relation_count) {
  return e * relation_count + r;
}

struct LineReader {
  std::ifstream in;
  std::string file;
  std::int64_t line_no = 0;

  explicit LineReader(const std::filesystem::path& path) : in(path), file(path.string()) {
    if (!in) throw DataError("missing or unreadable file: " + file);
  }

  bool next(std::string& out) {
    if (!std::getline(in, out)) return false;
    ++line_no;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(file + ":" + std::to_string(line_no) + ": " + what);
  }
};

std::int64_t parse_count_line(LineReader& r) {
  std::string line;
  if (!r.next(line)) r.fail("expected count line, found end of file");
  std::istringstream ss(line);
  std::int64_t n = -1;
  if (!(ss >> n) || n < 0) r.fail("malformed count line: '" + line + "'");
  std::string rest;
  if (ss >> rest) r.fail("trailing tokens after count: '" + line + "'");
  return n;
}

// "name<TAB>id" dictionary file; ids must cover 0..count-1 exactly once.
std::vector<std::string> load_dictionary(const std::filesystem::path& path) {
  LineReader r(path);
  const std::int64_t count = parse_count_line(r);
  std::vector<std::string> names(count);
  std::vector<bool> seen(count, false);
  std::string line;
  std::int64_t rows = 0;
  while (r.next(line)) {
    if (line.empty()) {
      if (r.in.peek() == EOF) break;  // tolerate one trailing newline
      r.fail("empty line");
    }
    const auto cut = line.find_last_of(" \t");
    if (cut == std::string::npos) r.fail("expected 'name<TAB>id': '" + line + "'");
    const std::string name = line.substr(0, cut);
    std::int64_t id = -1;
    try {
      id = std::stoll(line.substr(cut + 1));
    } catch (const std::exception&) {
      r.fail("malformed id in '" + line + "'");
    }
    if (id < 0 || id >= count) r.fail("id " + std::to_string(id) + " out of range [0," +
                                      std::to_string(count) + ")");
    if (seen[id]) r.fail("duplicate id " + std::to_string(id));
    seen[id] = true;
    names[id] = name;
    ++rows;
  }
  if (rows != count)
    throw DataError(path.string() + ": header says " + std::to_string(count) +
                    " entries but file has " + std::to_string(rows));
  return names;
}

// "h t r" triple file (OpenKE column order: tail before relation).
std::vector<Triple> load_triples(const std::filesystem::path& path, std::int64_t entity_count,
                                 std::int64_t relation_count) {
  LineReader r(path);
  const std::int64_t count = parse_count_line(r);
  std::vector<Triple> triples;
  triples.reserve(count);
  std::unordered_set<std::int64_t> seen;
  seen.reserve(count * 2);
  std::string line;
  while (r.next(line)) {
    if (line.empty()) {
      if (r.in.peek() == EOF) break;
      r.fail("empty line");
    }
    std::istringstream ss(line);
    std::int64_t h, t, rel;
    if (!(ss >> h >> t >> rel)) r.fail("expected 'h t r' integers: '" + line + "'");
    std::string rest;
    if (ss >> rest) r.fail("trailing tokens: '" + line + "'");
    if (h < 0 || h >= entity_count) r.fail("head index " + std::to_string(h) + " out of range");
    if (t < 0 || t >= entity_count) r.fail("tail index " + std::to_string(t) + " out of range");
    if (rel < 0 || rel >= relation_count)
      r.fail("relation index " + std::to_string(rel) + " out of range");
    if (!seen.insert(pack(h, rel, t, entity_count, relation_count)).second)
      r.fail("duplicate triple (" + std::to_string(h) + "," + std::to_string(rel) + "," +
             std::to_string(t) + ")");
    triples.push_back(Triple{static_cast<std::int32_t>(h), static_cast<std::int32_t>(rel),
                             static_cast<std::int32_t>(t)});
  }
  if (static_cast<std::int64_t>(triples.size()) != count)
    throw DataError(path.string() + ": header says " + std::to_string(count) +
                    " triples but file has " + std::to_string(triples.size()));
  return triples;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw DataError("dataset directory not found: " + dir.string());
  Dataset ds;
  ds.entity_names = load_dictionary(dir / "entity2id.txt");
  ds.relation_names = load_dictionary(dir / "relation2id.txt");
  ds.entity_count = static_cast<std::int64_t>(ds.entity_names.size());
  ds.relation_count = static_cast<std::int64_t>(ds.relation_names.size());
  ds.train = load_triples(dir / "train2id.txt", ds.entity_count, ds.relation_count);
  ds.test = load_triples(dir / "test2id.txt", ds.entity_count, ds.relation_count);
  const auto valid_path = dir / "valid2id.txt";
  if (std::filesystem::exists(valid_path))
    ds.valid = load_triples(valid_path, ds.entity_count, ds.relation_count);
  return ds;
}

const std::vector<std::int32_t>* AdjacencyIndex::tails(std::int32_t head,
                                                       std::int32_t rel) const {
  auto it = tails_by_head_rel.find(pack_pair(head, rel, relation_count));
  return it == tails_by_head_rel.end() ? nullptr : &it->second;
}

const std::vector<std::int32_t>* AdjacencyIndex::heads(std::int32_t tail,
                                                       std::int32_t rel) const {
  auto it = heads_by_tail_rel.find(pack_pair(tail, rel, relation_count));
  return it == heads_by_tail_rel.end() ? nullptr : &it->second;
}

bool AdjacencyIndex::contains(const Triple& t) const {
  const auto* ts = tails(t.head, t.relation);
  return ts != nullptr && std::binary_search(ts->begin(), ts->end(), t.tail);
}

std::size_t AdjacencyIndex::triple_count() const {
  std::size_t n = 0;
  for (const auto& [key, tails] : tails_by_head_rel) n += tails.size();
  return n;
}

AdjacencyIndex build_index(const std::vector<Triple>& triples, std::int64_t entity_count,
                           std::int64_t relation_count) {
  AdjacencyIndex idx;
  idx.entity_count = entity_count;
  idx.relation_count = relation_count;
  for (const Triple& t : triples) {
    if (t.head < 0 || t.head >= entity_count || t.tail < 0 || t.tail >= entity_count ||
        t.relation < 0 || t.relation >= relation_count)
      throw DataError("build_index: triple out of range");
    idx.tails_by_head_rel[pack_pair(t.head, t.relation, relation_count)].push_back(t.tail);
    idx.heads_by_tail_rel[pack_pair(t.tail, t.relation, relation_count)].push_back(t.head);
  }
  for (auto& [key, v] : idx.tails_by_head_rel) std::sort(v.begin(), v.end());
  for (auto& [key, v] : idx.heads_by_tail_rel) std::sort(v.begin(), v.end());
  return idx;
}

std::vector<Triple> enumerate_index(const AdjacencyIndex& index) {
  std::vector<Triple> out;
  out.reserve(index.triple_count());
  for (const auto& [key, tails] : index.tails_by_head_rel) {
    const auto h = static_cast<std::int32_t>(key / index.relation_count);
    const auto r = static_cast<std::int32_t>(key % index.relation_count);
    for (std::int32_t t : tails) out.push_back(Triple{h, r, t});
  }
  std::sort(out.begin(), out.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.head, a.relation, a.tail) < std::tie(b.head, b.relation, b.tail);
  });
  return out;
}

Dataset make_synthetic(std::uint64_t seed, std::int64_t entity_count,
                       std::int64_t relation_count, std::int64_t positive_count) {
  if (entity_count < 1 || relation_count < 1)
    throw UsageError("make_synthetic: need at least one entity and one relation");
  const std::int64_t slots = entity_count * entity_count * relation_count;
  if (positive_count < 0 || positive_count > slots)
    throw UsageError("make_synthetic: positive_count " + std::to_string(positive_count) +
                     " exceeds |E|^2 |R| = " + std::to_string(slots));

  Dataset ds;
  ds.entity_count = entity_count;
  ds.relation_count = relation_count;
  std::mt19937_64 rng(seed);
  const auto draw = [&rng](std::int64_t n) {
    return static_cast<std::int32_t>(rng() % static_cast<std::uint64_t>(n));
  };

  if (positive_count * 2 > slots) {
    // Dense regime: enumerate and shuffle instead of rejection sampling.
    std::vector<std::int64_t> all(slots);
    for (std::int64_t i = 0; i < slots; ++i) all[i] = i;
    for (std::int64_t i = slots - 1; i > 0; --i) {
      const std::int64_t j = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(all[i], all[j]);
    }
    for (std::int64_t i = 0; i < positive_count; ++i) {
      const std::int64_t code = all[i];
      const auto t = static_cast<std::int32_t>(code % entity_count);
      const auto r = static_cast<std::int32_t>((code / entity_count) % relation_count);
      const auto h = static_cast<std::int32_t>(code / (entity_count * relation_count));
      ds.train.push_back(Triple{h, r, t});
    }
  } else {
    std::unordered_set<std::int64_t> seen;
    seen.reserve(positive_count * 2);
    while (static_cast<std::int64_t>(ds.train.size()) < positive_count) {
      const Triple t{draw(entity_count), draw(relation_count), draw(entity_count)};
      if (seen.insert(pack(t.head, t.relation, t.tail, entity_count, relation_count)).second)
        ds.train.push_back(t);
    }
  }
  return ds;
}

}  // namespace kge
