// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "json.hpp"
#include "kge/models.hpp"

namespace kge {

namespace {
constexpr int kManifestVersion = 1;

void write_table(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!out) throw DataError("short write to " + path.string());
}

Matrix read_table(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("missing checkpoint table file: " + path.string());
  const auto bytes = static_cast<std::int64_t>(in.tellg());
  const std::int64_t expected = static_cast<std::int64_t>(sizeof(double)) * rows * cols;
  if (bytes != expected)
    throw DataError(path.string() + ": expected " + std::to_string(expected) + " bytes, found " +
                    std::to_string(bytes));
  Matrix m(rows, cols);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(m.data()), expected);
  if (!in) throw DataError("short read from " + path.string());
  return m;
}
}  // namespace

void save_checkpoint(const ParameterSet& params, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format_version"] = kManifestVersion;
  manifest["kind"] = to_string(params.kind);
  manifest["dim"] = params.dim;
  manifest["entity_count"] = params.entity_count;
  manifest["relation_count"] = params.relation_count;
  manifest["seed"] = params.seed;
  nlohmann::json files = nlohmann::json::object();
  std::vector<std::string> roles;
  for (const auto& [role, m] : params.tables) {
    roles.push_back(role);
    const std::string file = role + ".bin";
    files[role] = file;
    write_table(dir / file, m);
  }
  manifest["roles"] = roles;
  manifest["files"] = files;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
}

ParameterSet load_checkpoint(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("missing checkpoint manifest: " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  ParameterSet p;
  try {
    p.kind = parse_model_kind(manifest.at("kind").get<std::string>());
    p.dim = manifest.at("dim").get<std::int64_t>();
    p.entity_count = manifest.at("entity_count").get<std::int64_t>();
    p.relation_count = manifest.at("relation_count").get<std::int64_t>();
    p.seed = manifest.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  const auto roles = manifest.at("roles").get<std::vector<std::string>>();
  if (roles != role_names(p.kind))
    throw DataError(manifest_path.string() + ": role list does not match model " +
                    to_string(p.kind));
  for (const std::string& role : roles) {
    const std::string file = manifest.at("files").at(role).get<std::string>();
    const Eigen::Index rows = is_entity_role(role) ? p.entity_count : p.relation_count;
    p.tables.emplace_back(role, read_table(dir / file, rows, p.dim));
  }
  return p;
}

}  // namespace kge
