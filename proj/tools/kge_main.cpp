// SPDX-License-Identifier: Apache-2.0
//
// kge: train / eval / verify / bench for square-loss knowledge graph
// embeddings with full-negative (non-sampling) training.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kge/bench.hpp"
#include "kge/eval.hpp"
#include "kge/sampled.hpp"
#include "kge/verify.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

std::filesystem::path resolve_data_dir(const std::string& arg) {
  namespace fs = std::filesystem;
  if (fs::is_directory(arg)) return arg;
  if (const char* root = std::getenv("KGE_DATA_ROOT")) {
    const fs::path candidate = fs::path(root) / arg;
    if (fs::is_directory(candidate)) return candidate;
  }
  throw kge::DataError("dataset directory not found: " + arg +
                       " (also tried under $KGE_DATA_ROOT)");
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw kge::DataError("cannot write " + path.string());
  out << text;
}

struct TrainArgs {
  std::string data, model = "distmult", mode = "ns", out;
  std::int64_t dim = 200, epochs = 2000;
  double lr = 1e-4, lr_decay = 1.0, c_neg = 1e-3, l2 = 0.0;
  std::int64_t neg_k = 25, batch = 4000;
  std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a, int threads, bool deterministic, bool sampler_flags_given) {
  kge::TrainConfig cfg;
  cfg.kind = kge::parse_model_kind(a.model);
  cfg.dim = a.dim;
  cfg.epochs = a.epochs;
  cfg.lr = a.lr;
  cfg.lr_decay = a.lr_decay;
  cfg.c_neg = a.c_neg;
  cfg.l2 = a.l2;
  cfg.seed = a.seed;
  cfg.threads = threads;
  cfg.deterministic = deterministic;
  cfg.validate();

  if (a.mode != "ns" && a.mode != "sampled")
    throw kge::UsageError("--mode must be ns or sampled");
  if (a.mode == "ns" && sampler_flags_given)
    throw kge::UsageError("--neg-k/--batch are only valid with --mode sampled");

  const auto data_dir = resolve_data_dir(a.data);
  const kge::Dataset ds = kge::load_dataset(data_dir);

  kge::TrainResult result;
  if (a.mode == "ns") {
    result = kge::train(cfg, ds);
  } else {
    kge::SamplerConfig sc;
    sc.negatives_per_positive = a.neg_k;
    sc.batch_size = a.batch;
    result = kge::train_sampled(cfg, sc, ds);
  }

  std::filesystem::create_directories(a.out);
  kge::write_history_csv(result.history, std::filesystem::path(a.out) / "history.csv");
  kge::save_checkpoint(result.params, std::filesystem::path(a.out) / "checkpoint");

  nlohmann::json config_json{
      {"command", "train"},          {"version", kVersion},
      {"data", data_dir.string()},   {"model", a.model},
      {"mode", a.mode},              {"dim", a.dim},
      {"epochs", a.epochs},          {"lr", a.lr},
      {"lr_decay", a.lr_decay},      {"c_pos", cfg.c_pos},
      {"c_neg", a.c_neg},            {"l2", a.l2},
      {"seed", a.seed},              {"threads", threads},
      {"deterministic", deterministic}};
  if (a.mode == "sampled") {
    config_json["neg_k"] = a.neg_k;
    config_json["batch"] = a.batch;
  }
  config_json["config_hash"] = hex64(fnv1a64(config_json.dump()));
  write_text_file(std::filesystem::path(a.out) / "config.json", config_json.dump(2) + "\n");

  if (result.diverged) {
    std::cerr << "training diverged: " << result.diagnostic << "\n";
    return 3;
  }
  return 0;
}

int run_eval(const std::string& data, const std::string& checkpoint, const std::string& mode,
             const std::string& out, int threads) {
  if (mode != "raw" && mode != "filtered") throw kge::UsageError("--mode must be raw or filtered");
  const auto data_dir = resolve_data_dir(data);
  const kge::Dataset ds = kge::load_dataset(data_dir);
  const kge::ParameterSet params = kge::load_checkpoint(checkpoint);
  if (params.entity_count != ds.entity_count || params.relation_count != ds.relation_count)
    throw kge::DataError("checkpoint manifest (|E|=" + std::to_string(params.entity_count) +
                         ", |R|=" + std::to_string(params.relation_count) +
                         ") does not match dataset (|E|=" + std::to_string(ds.entity_count) +
                         ", |R|=" + std::to_string(ds.relation_count) + ")");
  if (ds.test.empty()) throw kge::DataError("dataset has an empty test split");

  const kge::RankMode rank_mode =
      mode == "raw" ? kge::RankMode::Raw : kge::RankMode::Filtered;
  kge::AdjacencyIndex filter;
  if (rank_mode == kge::RankMode::Filtered) {
    std::vector<kge::Triple> all = ds.train;
    all.insert(all.end(), ds.valid.begin(), ds.valid.end());
    all.insert(all.end(), ds.test.begin(), ds.test.end());
    filter = kge::build_index(all, ds.entity_count, ds.relation_count);
  }
  const kge::RankMetrics m = kge::evaluate(params.kind, params, ds.test, rank_mode,
                                           rank_mode == kge::RankMode::Filtered ? &filter : nullptr,
                                           threads);

  nlohmann::json j{{"model", kge::to_string(params.kind)},
                   {"dataset", data_dir.filename().string()},
                   {"mode", mode},
                   {"mr", m.mr},
                   {"mrr", m.mrr},
                   {"hr1", m.hr1},
                   {"hr3", m.hr3},
                   {"hr10", m.hr10},
                   {"evaluation_count", m.evaluation_count},
                   {"seed", params.seed}};
  j["config"] = nlohmann::json{{"command", "eval"},     {"version", kVersion},
                               {"data", data_dir.string()}, {"checkpoint", checkpoint},
                               {"mode", mode},           {"threads", threads}};
  j["config_hash"] = hex64(fnv1a64(j.dump()));
  const std::string text = j.dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text_file(out, text);
  return 0;
}

int run_verify(const std::string& scale, std::uint64_t seed) {
  if (scale != "tiny" && scale != "small") throw kge::UsageError("--scale must be tiny or small");
  const auto results = kge::verify_properties(
      scale == "tiny" ? kge::VerifyScale::Tiny : kge::VerifyScale::Small, seed);
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("[%s] %-8s %-17s observed %.3e (tol %.1e)\n", r.pass ? "PASS" : "FAIL",
                kge::to_string(r.kind).c_str(), r.property.c_str(), r.observed, r.tolerance);
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 3;
}

int run_bench(const std::string& data, std::int64_t dim, std::int64_t epochs,
              const std::string& out, std::uint64_t seed, int threads) {
  const auto data_dir = resolve_data_dir(data);
  const kge::Dataset ds = kge::load_dataset(data_dir);
  kge::TrainConfig base;
  base.seed = seed;
  base.threads = threads;
  base.lr = 1e-4;
  kge::SamplerConfig sampler;  // 25 negatives, batch 4000
  const kge::EpochReport report =
      kge::compare_epoch_time(ds, dim, static_cast<int>(epochs), base, sampler);
  std::cout << kge::to_text_table(report);
  if (!out.empty()) {
    nlohmann::json j = kge::to_json(report);
    j["config"] = nlohmann::json{{"command", "bench"},       {"version", kVersion},
                                 {"data", data_dir.string()}, {"dim", dim},
                                 {"epochs", epochs},          {"seed", seed},
                                 {"neg_k", sampler.negatives_per_positive},
                                 {"batch", sampler.batch_size}};
    j["config_hash"] = hex64(fnv1a64(j.dump()));
    write_text_file(out, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"square-loss knowledge graph embeddings with full-negative training"};
  app.require_subcommand(1);
  int threads = 1;
  bool deterministic = true;
  app.add_option("--threads", threads, "worker thread count")->check(CLI::PositiveNumber);
  app.add_flag("--deterministic,!--no-deterministic", deterministic,
               "fixed reduction partitioning (default on)");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train one model on one dataset");
  train_cmd->add_option("--data", ta.data, "dataset directory")->required();
  train_cmd->add_option("--model", ta.model, "distmult|simple|complex|transe");
  train_cmd->add_option("--mode", ta.mode, "ns|sampled");
  train_cmd->add_option("--dim", ta.dim, "embedding dimension");
  train_cmd->add_option("--epochs", ta.epochs, "training epochs");
  train_cmd->add_option("--lr", ta.lr, "initial learning rate");
  train_cmd->add_option("--lr-decay", ta.lr_decay, "decay factor applied once at mid-training");
  train_cmd->add_option("--c-neg", ta.c_neg, "weight of negative instances");
  train_cmd->add_option("--l2", ta.l2, "l2 penalty coefficient");
  train_cmd->add_option("--neg-k", ta.neg_k, "negatives per positive (sampled mode)");
  train_cmd->add_option("--batch", ta.batch, "batch size (sampled mode)");
  train_cmd->add_option("--seed", ta.seed, "rng seed");
  train_cmd->add_option("--out", ta.out, "output directory")->required();

  std::string ev_data, ev_checkpoint, ev_mode = "raw", ev_out;
  auto* eval_cmd = app.add_subcommand("eval", "ranking evaluation of a checkpoint");
  eval_cmd->add_option("--data", ev_data)->required();
  eval_cmd->add_option("--checkpoint", ev_checkpoint)->required();
  eval_cmd->add_option("--mode", ev_mode, "raw|filtered");
  eval_cmd->add_option("--out", ev_out, "metrics JSON file (stdout when omitted)");

  std::string vf_scale = "tiny";
  std::uint64_t vf_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "run the oracle property suite");
  verify_cmd->add_option("--scale", vf_scale, "tiny|small");
  verify_cmd->add_option("--seed", vf_seed);

  std::string bn_data, bn_out;
  std::int64_t bn_dim = 64, bn_epochs = 10;
  std::uint64_t bn_seed = 0;
  auto* bench_cmd = app.add_subcommand("bench", "epoch-time comparison, ns vs sampled");
  bench_cmd->add_option("--data", bn_data)->required();
  bench_cmd->add_option("--dim", bn_dim);
  bench_cmd->add_option("--epochs", bn_epochs, "timed epochs per configuration");
  bench_cmd->add_option("--out", bn_out, "report JSON file");
  bench_cmd->add_option("--seed", bn_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(train_cmd)) {
      const bool sampler_flags =
          train_cmd->count("--neg-k") > 0 || train_cmd->count("--batch") > 0;
      return run_train(ta, threads, deterministic, sampler_flags);
    }
    if (app.got_subcommand(eval_cmd)) return run_eval(ev_data, ev_checkpoint, ev_mode, ev_out, threads);
    if (app.got_subcommand(verify_cmd)) return run_verify(vf_scale, vf_seed);
    if (app.got_subcommand(bench_cmd))
      return run_bench(bn_data, bn_dim, bn_epochs, bn_out, bn_seed, threads);
  } catch (const kge::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const kge::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
