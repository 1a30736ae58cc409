// SPDX-License-Identifier: Apache-2.0
#include "kge/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "kge/oracle.hpp"

namespace kge {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double timed(F&& f) {
  const double t0 = now_seconds();
  f();
  return now_seconds() - t0;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw UsageError("median of empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

LossPathReport time_loss_paths(ModelKind kind, std::int64_t entities, std::int64_t relations,
                               std::int64_t dim, int repeats, std::uint64_t seed) {
  if (repeats < 1) throw UsageError("time_loss_paths: repeats must be >= 1");
  LossPathReport rep;
  rep.kind = kind;
  rep.entities = entities;
  rep.relations = relations;
  rep.dim = dim;
  rep.repeats = repeats;

  const ParameterSet params = init_params(kind, entities, relations, dim, seed);

  // Correctness handshake before any timing.
  const double naive_value = oracle::naive_square_sum(kind, params);
  const double efficient_value = all_pairs_loss(kind, params, 1.0);
  rep.value_rel_err = oracle::rel_err(efficient_value, naive_value);
  if (rep.value_rel_err > 1e-8)
    throw NumericError("time_loss_paths: naive and efficient values disagree (rel err " +
                       std::to_string(rep.value_rel_err) + ")");

  volatile double sink = 0.0;
  std::vector<double> naive_times, efficient_times;
  timed([&] { sink = oracle::naive_square_sum(kind, params); });  // warm-up
  for (int i = 0; i < repeats; ++i)
    naive_times.push_back(timed([&] { sink = oracle::naive_square_sum(kind, params); }));
  timed([&] { sink = all_pairs_loss(kind, params, 1.0); });  // warm-up
  for (int i = 0; i < repeats; ++i)
    efficient_times.push_back(timed([&] { sink = all_pairs_loss(kind, params, 1.0); }));
  (void)sink;

  rep.naive_median_s = median(naive_times);
  rep.naive_min_s = *std::min_element(naive_times.begin(), naive_times.end());
  rep.naive_max_s = *std::max_element(naive_times.begin(), naive_times.end());
  rep.efficient_median_s = median(efficient_times);
  rep.efficient_min_s = *std::min_element(efficient_times.begin(), efficient_times.end());
  rep.efficient_max_s = *std::max_element(efficient_times.begin(), efficient_times.end());
  rep.ratio = rep.naive_median_s / rep.efficient_median_s;
  return rep;
}

EpochReport compare_epoch_time(const Dataset& dataset, std::int64_t dim, int timed_epochs,
                               const TrainConfig& base, const SamplerConfig& sampler) {
  if (timed_epochs < 1) throw UsageError("compare_epoch_time: timed_epochs must be >= 1");
  EpochReport report;
  report.timed_epochs = timed_epochs;
  report.threads = base.threads;

  constexpr std::array<ModelKind, 4> kinds = {ModelKind::DistMult, ModelKind::SimplE,
                                              ModelKind::ComplEx, ModelKind::TransE};
  std::vector<std::pair<ModelKind, double>> ns_medians;
  for (ModelKind kind : kinds) {
    TrainConfig cfg = base;
    cfg.kind = kind;
    cfg.dim = dim;
    cfg.epochs = timed_epochs + 1;  // first epoch is the warm-up

    const TrainResult ns = train(cfg, dataset);
    if (ns.diverged) throw NumericError("compare_epoch_time: ns run diverged: " + ns.diagnostic);
    std::vector<double> ns_times;
    for (std::size_t e = 1; e < ns.history.size(); ++e) ns_times.push_back(ns.history[e].seconds);

    const TrainResult sm = train_sampled(cfg, sampler, dataset);
    if (sm.diverged)
      throw NumericError("compare_epoch_time: sampled run diverged: " + sm.diagnostic);
    std::vector<double> sm_times;
    for (std::size_t e = 1; e < sm.history.size(); ++e) sm_times.push_back(sm.history[e].seconds);

    const double ns_median = median(ns_times);
    const double sm_median = median(sm_times);
    const auto spread = [](const std::vector<double>& v) {
      return std::pair<double, double>{*std::min_element(v.begin(), v.end()),
                                       *std::max_element(v.begin(), v.end())};
    };
    const auto [ns_min, ns_max] = spread(ns_times);
    const auto [sm_min, sm_max] = spread(sm_times);
    report.rows.push_back(EpochRow{kind, "sampled", sm_median, sm_min, sm_max, 1.0});
    report.rows.push_back(EpochRow{kind, "ns", ns_median, ns_min, ns_max, sm_median / ns_median});
    ns_medians.emplace_back(kind, ns_median);
  }

  std::stable_sort(ns_medians.begin(), ns_medians.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });
  for (const auto& [kind, t] : ns_medians) report.ns_order.push_back(kind);
  return report;
}

nlohmann::json to_json(const LossPathReport& r) {
  return nlohmann::json{{"kind", to_string(r.kind)},
                        {"entities", r.entities},
                        {"relations", r.relations},
                        {"dim", r.dim},
                        {"repeats", r.repeats},
                        {"threads", r.threads},
                        {"naive_median_seconds", r.naive_median_s},
                        {"naive_min_seconds", r.naive_min_s},
                        {"naive_max_seconds", r.naive_max_s},
                        {"efficient_median_seconds", r.efficient_median_s},
                        {"efficient_min_seconds", r.efficient_min_s},
                        {"efficient_max_seconds", r.efficient_max_s},
                        {"ratio", r.ratio},
                        {"value_rel_err", r.value_rel_err}};
}

nlohmann::json to_json(const EpochReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const EpochRow& row : r.rows)
    rows.push_back(nlohmann::json{{"model", to_string(row.kind)},
                                  {"mode", row.mode},
                                  {"seconds_per_epoch", row.median_epoch_s},
                                  {"min_seconds_per_epoch", row.min_epoch_s},
                                  {"max_seconds_per_epoch", row.max_epoch_s},
                                  {"speedup", row.speedup}});
  nlohmann::json order = nlohmann::json::array();
  for (ModelKind k : r.ns_order) order.push_back(to_string(k));
  return nlohmann::json{{"timed_epochs", r.timed_epochs},
                        {"threads", r.threads},
                        {"rows", rows},
                        {"ns_order", order}};
}

std::string to_text_table(const EpochReport& r) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-12s %-9s %14s %10s\n", "model", "mode", "sec/epoch",
                "speed-up");
  out << line;
  for (const EpochRow& row : r.rows) {
    std::snprintf(line, sizeof(line), "%-12s %-9s %14.4f %10.2f\n", to_string(row.kind).c_str(),
                  row.mode.c_str(), row.median_epoch_s, row.speedup);
    out << line;
  }
  out << "ns epoch-time order:";
  for (ModelKind k : r.ns_order) out << " " << to_string(k);
  out << "\n";
  return out.str();
}

}  // namespace kge
