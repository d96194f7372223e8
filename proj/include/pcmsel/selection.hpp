#pragma once

// Scoring a whole zoo: shared probe sampling, repeats, averaging, timing,
// ranking, metadata baselines and top-b selection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcmsel/distribution.hpp"
#include "pcmsel/error.hpp"
#include "pcmsel/parallel.hpp"
#include "pcmsel/proxy.hpp"
#include "pcmsel/random.hpp"
#include "pcmsel/zoo_data.hpp"

namespace pcmsel {

inline const std::vector<std::string>& learning_method_ids() {
  static const std::vector<std::string> ids = {"knn1", "knn3", "knn5", "linear", "svm", "parc", "hscore"};
  return ids;
}

inline const std::vector<std::string>& baseline_method_ids() {
  static const std::vector<std::string> ids = {"size", "data"};
  return ids;
}

inline const std::vector<std::string>& all_method_ids() {
  static const std::vector<std::string> ids = [] {
    auto all = learning_method_ids();
    all.insert(all.end(), baseline_method_ids().begin(), baseline_method_ids().end());
    return all;
  }();
  return ids;
}

inline bool is_baseline_method(const std::string& id) {
  const auto& b = baseline_method_ids();
  return std::find(b.begin(), b.end(), id) != b.end();
}

inline void check_method_ids(const std::vector<std::string>& methods) {
  if (methods.empty()) throw UsageError("no methods requested");
  std::set<std::string> seen;
  for (const auto& m : methods) {
    const auto& all = all_method_ids();
    if (std::find(all.begin(), all.end(), m) == all.end()) {
      std::string valid;
      for (const auto& id : all) valid += (valid.empty() ? "" : ",") + id;
      throw UsageError("unknown method '" + m + "'; valid ids: " + valid);
    }
    if (!seen.insert(m).second) throw UsageError("method '" + m + "' requested twice");
  }
}

struct RankedEntry {
  std::string model_id;
  double score = 0.0;
};

struct RankedList {
  std::string task_id;
  std::string method_id;
  std::vector<RankedEntry> entries;  // score descending, manifest order on ties
  std::size_t budget_b = 0;

  std::vector<std::string> model_ids() const {
    std::vector<std::string> ids;
    ids.reserve(entries.size());
    for (const auto& e : entries) ids.push_back(e.model_id);
    return ids;
  }
};

// Sorts scores descending; equal scores keep manifest order.
inline RankedList rank_models(const std::vector<TransferabilityScore>& scores, const ZooManifest& manifest,
                              std::size_t budget_b) {
  const std::size_t n = manifest.size();
  if (budget_b < 1 || budget_b > n) {
    throw UsageError("budget b=" + std::to_string(budget_b) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<std::optional<double>> by_position(n);
  std::string method_id;
  for (const auto& s : scores) {
    const auto pos = manifest.index_of(s.model_id);
    if (!pos) throw DataError("score for model '" + s.model_id + "' which is not in the manifest");
    if (by_position[*pos]) throw DataError("duplicate score for model '" + s.model_id + "'");
    if (std::isnan(s.value)) throw NumericalError("score for model '" + s.model_id + "' is NaN");
    by_position[*pos] = s.value;
    method_id = s.method_id;
  }
  RankedList out;
  out.task_id = manifest.task_id;
  out.method_id = method_id;
  out.budget_b = budget_b;
  for (std::size_t i = 0; i < n; ++i) {
    if (!by_position[i]) throw DataError("missing score for model '" + manifest.models[i].model_id + "'");
    out.entries.push_back({manifest.models[i].model_id, *by_position[i]});
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) { return a.score > b.score; });
  return out;
}

inline std::vector<std::string> select_top_b(const RankedList& ranked, std::size_t budget_b) {
  if (budget_b < 1 || budget_b > ranked.entries.size()) {
    throw UsageError("budget b=" + std::to_string(budget_b) + " outside [1, " +
                     std::to_string(ranked.entries.size()) + "]");
  }
  auto ids = ranked.model_ids();
  ids.resize(budget_b);
  return ids;
}

namespace detail {

inline std::vector<TransferabilityScore> metadata_scores(const ZooManifest& manifest, const std::string& method,
                                                         const std::vector<double>& raw) {
  const double top = *std::max_element(raw.begin(), raw.end());
  std::vector<TransferabilityScore> scores;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    TransferabilityScore s;
    s.model_id = manifest.models[i].model_id;
    s.method_id = method;
    s.value = top > 0.0 ? raw[i] / top : 0.0;
    s.per_repeat = {s.value};
    scores.push_back(std::move(s));
  }
  return scores;
}

inline std::vector<TransferabilityScore> model_size_scores(const ZooManifest& manifest) {
  std::vector<double> raw;
  for (const auto& m : manifest.models) raw.push_back(static_cast<double>(m.param_count));
  return metadata_scores(manifest, "size", raw);
}

inline std::vector<TransferabilityScore> dataset_size_scores(const ZooManifest& manifest) {
  std::vector<double> raw;
  for (const auto& m : manifest.models) raw.push_back(static_cast<double>(m.pretrain_dataset_size));
  if (*std::max_element(raw.begin(), raw.end()) <= 0.0) {
    throw DataError("dataset-size baseline: every model has unknown pretraining size");
  }
  return metadata_scores(manifest, "data", raw);
}

}  // namespace detail

// Largest parameter count first.
inline RankedList baseline_model_size(const ZooManifest& manifest) {
  return rank_models(detail::model_size_scores(manifest), manifest, manifest.size());
}

// Largest known pretraining corpus first; unknown sizes (0) trail in manifest
// order with score 0.
inline RankedList baseline_dataset_size(const ZooManifest& manifest) {
  return rank_models(detail::dataset_size_scores(manifest), manifest, manifest.size());
}

// ---------------------------------------------------------------------------
// Zoo scoring
// ---------------------------------------------------------------------------

struct ScoreOptions {
  std::size_t probe_size = 1000;
  int repeats = 5;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  double train_fraction = 0.7;
  double gamma_scale = kDefaultGammaScale;
  LinearParams linear;
  SvmParams svm;
};

struct MethodResult {
  std::vector<TransferabilityScore> scores;  // manifest order
  RankedList ranking;
  double seconds = 0.0;
};

struct SelectionRun {
  std::string task_id;
  std::size_t probe_size = 0;
  int repeats = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds;  // sampling seed of each repeat
  std::vector<std::string> methods;  // requested order
  std::map<std::string, MethodResult> per_method;

  const MethodResult& result(const std::string& method) const {
    const auto it = per_method.find(method);
    if (it == per_method.end()) throw DataError("run has no results for method '" + method + "'");
    return it->second;
  }
};

// Seed of the proxy train/test split for one repeat.
inline std::uint64_t split_seed(std::uint64_t global_seed, int repeat) {
  Rng rng = make_rng({global_seed, static_cast<std::uint64_t>(repeat), 0x73706c6974ULL});
  return rng();
}

inline ProxyConfig proxy_config_for(const std::string& method, const ScoreOptions& options, std::uint64_t seed) {
  ProxyConfig cfg;
  cfg.train_fraction = options.train_fraction;
  cfg.seed = seed;
  cfg.linear = options.linear;
  cfg.svm = options.svm;
  if (method.rfind("knn", 0) == 0) {
    cfg.method = ProxyMethod::knn;
    cfg.k = std::stoi(method.substr(3));
  } else if (method == "linear") {
    cfg.method = ProxyMethod::linear;
  } else if (method == "svm") {
    cfg.method = ProxyMethod::svm;
  } else {
    throw UsageError("'" + method + "' is not a proxy method");
  }
  return cfg;
}

// One learning method on one (already sampled) probe.
inline TransferabilityScore score_method(const ProbeDataset& probe, const std::string& method,
                                         const ScoreOptions& options, std::uint64_t repeat_split_seed) {
  if (method == "parc") return score_parc(probe);
  if (method == "hscore") return score_hscore(probe, options.gamma_scale);
  return score_proxy(probe, proxy_config_for(method, options, repeat_split_seed));
}

namespace detail {

inline TransferabilityScore merge_repeats(std::vector<TransferabilityScore> repeats) {
  TransferabilityScore out;
  out.model_id = repeats.front().model_id;
  out.method_id = repeats.front().method_id;
  for (const auto& r : repeats) {
    out.per_repeat.push_back(r.value);
    out.wall_clock_seconds += r.wall_clock_seconds;
    out.unconverged_repeats += r.unconverged_repeats;
  }
  out.value = std::accumulate(out.per_repeat.begin(), out.per_repeat.end(), 0.0) /
              static_cast<double>(out.per_repeat.size());
  return out;
}

}  // namespace detail

// Scores every model of the manifest with every requested method. Repeat r
// draws one set of row indices with seed + r and applies it to every model,
// so all models see the same underlying samples. Per-model scores are the
// mean over repeats; timings cover scoring only (no file I/O).
inline SelectionRun score_zoo(const ZooManifest& manifest, const std::filesystem::path& base_dir,
                              const std::vector<std::string>& methods, const ScoreOptions& options) {
  validate_manifest(manifest);
  check_method_ids(methods);
  if (options.repeats < 1) throw UsageError("repeats must be >= 1");

  SelectionRun run;
  run.task_id = manifest.task_id;
  run.probe_size = options.probe_size;
  run.repeats = options.repeats;
  run.seed = options.seed;
  run.methods = methods;

  std::vector<std::string> learning;
  for (const auto& m : methods) {
    if (!is_baseline_method(m)) learning.push_back(m);
  }

  if (!learning.empty()) {
    // Shared row indices, drawn from rows every model has.
    std::size_t common_rows = std::numeric_limits<std::size_t>::max();
    for (const auto& m : manifest.models) {
      try {
        const auto h = read_fmx_header(feature_file(m, base_dir));
        common_rows = std::min<std::size_t>(common_rows, h.n_samples);
      } catch (const DataError& e) {
        throw DataError("model '" + m.model_id + "': " + e.what());
      }
    }
    if (options.probe_size > common_rows) {
      throw DataError("probe size " + std::to_string(options.probe_size) + " exceeds the " +
                      std::to_string(common_rows) + " rows available in every model's features");
    }
    std::vector<Label> reference;
    try {
      reference = read_fmx_labels(feature_file(manifest.models.front(), base_dir));
    } catch (const DataError& e) {
      throw DataError("model '" + manifest.models.front().model_id + "': " + e.what());
    }
    reference.resize(common_rows);

    std::vector<IndexList> samples;
    for (int r = 0; r < options.repeats; ++r) {
      const std::uint64_t s = options.seed + static_cast<std::uint64_t>(r);
      run.seeds.push_back(s);
      samples.push_back(sample_probe_indices(reference, options.probe_size, s));
    }

    // results[model][method]
    std::vector<std::vector<TransferabilityScore>> results(manifest.size());
    parallel_for(manifest.size(), options.threads, [&](std::size_t mi) {
      const ModelRecord& record = manifest.models[mi];
      try {
        const ProbeDataset full = load_features(record, base_dir);
        if (full.label_count != manifest.label_count) {
          throw DataError("label_count " + std::to_string(full.label_count) + " differs from manifest's " +
                          std::to_string(manifest.label_count));
        }
        std::vector<std::vector<TransferabilityScore>> per_method(learning.size());
        for (int r = 0; r < options.repeats; ++r) {
          const IndexList& rows = samples[static_cast<std::size_t>(r)];
          for (const auto row : rows) {
            if (full.labels[row] != reference[row]) {
              throw DataError("labels are not aligned with model '" + manifest.models.front().model_id +
                              "' at row " + std::to_string(row));
            }
          }
          const ProbeDataset probe = take_rows(full, rows);
          const std::uint64_t split = split_seed(options.seed, r);
          for (std::size_t k = 0; k < learning.size(); ++k) {
            per_method[k].push_back(score_method(probe, learning[k], options, split));
          }
        }
        for (auto& reps : per_method) results[mi].push_back(detail::merge_repeats(std::move(reps)));
      } catch (const NumericalError& e) {
        throw NumericalError("model '" + record.model_id + "': " + e.what());
      } catch (const UsageError&) {
        throw;
      } catch (const Error& e) {
        throw DataError("model '" + record.model_id + "': " + e.what());
      }
    });

    for (std::size_t k = 0; k < learning.size(); ++k) {
      MethodResult mr;
      for (std::size_t mi = 0; mi < manifest.size(); ++mi) {
        mr.scores.push_back(results[mi][k]);
        mr.seconds += results[mi][k].wall_clock_seconds;
      }
      mr.ranking = rank_models(mr.scores, manifest, manifest.size());
      run.per_method[learning[k]] = std::move(mr);
    }
  }

  for (const auto& m : methods) {
    if (!is_baseline_method(m)) continue;
    MethodResult mr;
    mr.scores = m == "size" ? detail::model_size_scores(manifest) : detail::dataset_size_scores(manifest);
    mr.ranking = rank_models(mr.scores, manifest, manifest.size());
    run.per_method[m] = std::move(mr);
  }
  return run;
}

// Restricts a run to the first `count` manifest models and re-ranks.
inline SelectionRun restrict_run(const SelectionRun& run, const ZooManifest& prefix) {
  SelectionRun out = run;
  for (auto& [method, mr] : out.per_method) {
    std::vector<TransferabilityScore> kept;
    double seconds = 0.0;
    for (const auto& s : mr.scores) {
      if (prefix.index_of(s.model_id)) {
        kept.push_back(s);
        seconds += s.wall_clock_seconds;
      }
    }
    mr.scores = std::move(kept);
    mr.seconds = seconds;
    mr.ranking = rank_models(mr.scores, prefix, prefix.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON report
// ---------------------------------------------------------------------------

inline constexpr int kReportSchemaVersion = 1;

inline nlohmann::ordered_json run_to_json(const SelectionRun& run, const nlohmann::ordered_json& config = {}) {
  nlohmann::ordered_json methods = nlohmann::ordered_json::object();
  for (const auto& id : run.methods) {
    const MethodResult& mr = run.result(id);
    nlohmann::ordered_json scores = nlohmann::ordered_json::array();
    for (const auto& s : mr.scores) {
      scores.push_back({{"model_id", s.model_id},
                        {"value", s.value},
                        {"per_repeat", s.per_repeat},
                        {"seconds", s.wall_clock_seconds},
                        {"unconverged_repeats", s.unconverged_repeats}});
    }
    methods[id] = {{"scores", std::move(scores)}, {"ranking", mr.ranking.model_ids()}, {"seconds", mr.seconds}};
  }
  nlohmann::ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["kind"] = "selection_run";
  doc["config"] = config.is_null() ? nlohmann::ordered_json::object() : config;
  doc["task_id"] = run.task_id;
  doc["probe_size"] = run.probe_size;
  doc["repeats"] = run.repeats;
  doc["seed"] = run.seed;
  doc["seeds"] = run.seeds;
  doc["method_order"] = run.methods;
  doc["methods"] = std::move(methods);
  return doc;
}

inline SelectionRun run_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw DataError("selection report: unsupported schema_version");
    }
    SelectionRun run;
    run.task_id = doc.at("task_id").get<std::string>();
    run.probe_size = doc.at("probe_size").get<std::size_t>();
    run.repeats = doc.at("repeats").get<int>();
    run.seed = doc.at("seed").get<std::uint64_t>();
    run.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
    run.methods = doc.at("method_order").get<std::vector<std::string>>();
    for (const auto& id : run.methods) {
      const auto& m = doc.at("methods").at(id);
      MethodResult mr;
      mr.seconds = m.at("seconds").get<double>();
      std::map<std::string, double> by_id;
      for (const auto& s : m.at("scores")) {
        TransferabilityScore ts;
        ts.model_id = s.at("model_id").get<std::string>();
        ts.method_id = id;
        ts.value = s.at("value").get<double>();
        ts.per_repeat = s.at("per_repeat").get<std::vector<double>>();
        ts.wall_clock_seconds = s.at("seconds").get<double>();
        ts.unconverged_repeats = s.value("unconverged_repeats", 0);
        by_id[ts.model_id] = ts.value;
        mr.scores.push_back(std::move(ts));
      }
      mr.ranking.task_id = run.task_id;
      mr.ranking.method_id = id;
      for (const auto& model : m.at("ranking")) {
        const auto model_id = model.get<std::string>();
        const auto it = by_id.find(model_id);
        if (it == by_id.end()) throw DataError("selection report: ranked model '" + model_id + "' has no score");
        mr.ranking.entries.push_back({model_id, it->second});
      }
      if (mr.ranking.entries.size() != mr.scores.size()) {
        throw DataError("selection report: ranking and scores of '" + id + "' differ in length");
      }
      mr.ranking.budget_b = mr.ranking.entries.size();
      run.per_method[id] = std::move(mr);
    }
    return run;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("selection report: ") + e.what());
  }
}

}  // namespace pcmsel
