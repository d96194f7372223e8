#pragma once

// Command-line front end: score, evaluate, sweep-budget, sweep-zoo,
// gen-synthetic. Exit codes: 0 success, 2 usage, 3 data/validation,
// 4 numerical/internal.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcmsel/pcmsel.hpp"

namespace pcmsel::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

struct Options {
  std::string manifest;
  std::string truth;
  std::string run_report;
  std::string methods;
  std::size_t probe_size = 1000;
  std::string probe_sizes = "1000,2000,5000";
  std::string zoo_sizes = "10,30,100";
  int repeats = 5;
  std::uint64_t seed = 42;
  std::string k_list;
  std::string out;
  std::string format = "json";
  // gen-synthetic
  std::string out_dir;
  ZooSpec zoo;
  std::string metadata = "decorrelated";
};

inline std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline std::vector<std::size_t> parse_sizes(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  for (const auto& item : split_csv(text)) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v == 0 || item.front() == '-') {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a positive integer");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

inline std::vector<std::string> resolve_methods(const std::string& csv) {
  std::vector<std::string> methods = csv.empty() ? all_method_ids() : split_csv(csv);
  check_method_ids(methods);
  return methods;
}

inline void emit(const Options& opt, const std::string& text, std::ostream& out) {
  if (opt.out.empty()) {
    out << text;
  } else {
    write_file_atomic(opt.out, text);
  }
}

inline ScoreOptions score_options(const Options& opt, std::size_t probe_size) {
  ScoreOptions so;
  so.probe_size = probe_size;
  so.repeats = opt.repeats;
  so.seed = opt.seed;
  so.threads = thread_count_from_env();
  return so;
}

inline std::filesystem::path base_dir_of(const std::string& manifest_path) {
  auto parent = std::filesystem::path(manifest_path).parent_path();
  return parent.empty() ? std::filesystem::path(".") : parent;
}

inline nlohmann::ordered_json common_config(const Options& opt, const std::vector<std::string>& methods) {
  return {{"manifest", opt.manifest},
          {"truth", opt.truth},
          {"methods", methods},
          {"repeats", opt.repeats},
          {"seed", opt.seed},
          {"train_fraction", 0.7},
          {"gamma_scale", kDefaultGammaScale}};
}

inline std::string run_table(const SelectionRun& run) {
  std::ostringstream os;
  const auto& first = run.result(run.methods.front());
  os << std::left << std::setw(24) << "Model";
  for (const auto& m : run.methods) os << std::right << std::setw(12) << m;
  os << '\n' << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < first.scores.size(); ++i) {
    os << std::left << std::setw(24) << first.scores[i].model_id;
    for (const auto& m : run.methods) os << std::right << std::setw(12) << run.result(m).scores[i].value;
    os << '\n';
  }
  os << std::left << std::setw(24) << "seconds";
  for (const auto& m : run.methods) os << std::right << std::setw(12) << run.result(m).seconds;
  os << '\n';
  return os.str();
}

inline int cmd_score(const Options& opt, std::ostream& out) {
  const auto methods = resolve_methods(opt.methods);
  const ZooManifest manifest = load_manifest(opt.manifest);
  const SelectionRun run = score_zoo(manifest, base_dir_of(opt.manifest), methods, score_options(opt, opt.probe_size));
  auto config = common_config(opt, methods);
  config["probe_size"] = opt.probe_size;
  emit(opt, opt.format == "table" ? run_table(run) : run_to_json(run, config).dump(2) + "\n", out);
  return kOk;
}

inline std::vector<std::size_t> k_values_or(const Options& opt, std::vector<std::size_t> fallback) {
  return opt.k_list.empty() ? fallback : parse_sizes(opt.k_list, "--k");
}

inline std::string evaluation_text(const std::vector<EvaluationResult>& results, const std::string& format) {
  auto all = results;
  const auto groups = group_aggregates(results);
  all.insert(all.end(), groups.begin(), groups.end());
  if (format == "table") return format_evaluation_table(all);
  nlohmann::ordered_json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["kind"] = "evaluation";
  doc["k"] = results.front().k_values;
  doc["methods"] = evaluation_to_json(results);
  doc["groups"] = evaluation_to_json(groups);
  return doc.dump(2) + "\n";
}

inline int cmd_evaluate(const Options& opt, std::ostream& out) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(opt.run_report));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("selection report '" + opt.run_report + "': " + e.what());
  }
  const SelectionRun run = run_from_json(doc);
  const GroundTruthTable truth = load_truth(opt.truth);
  const auto results = evaluate_selection(run, truth, k_values_or(opt, {1, 5, 10}));
  emit(opt, evaluation_text(results, opt.format), out);
  return kOk;
}

inline int cmd_sweep_budget(const Options& opt, std::ostream& out) {
  const auto methods = resolve_methods(opt.methods);
  const ZooManifest manifest = load_manifest(opt.manifest);
  const GroundTruthTable truth = load_truth(opt.truth);
  const auto sizes = parse_sizes(opt.probe_sizes, "--probe-sizes");
  const auto ks = k_values_or(opt, {std::min<std::size_t>(5, manifest.size())});

  nlohmann::ordered_json grid = nlohmann::ordered_json::array();
  std::ostringstream table;
  table << std::fixed << std::setprecision(4);
  for (const auto size : sizes) {
    const SelectionRun run = score_zoo(manifest, base_dir_of(opt.manifest), methods, score_options(opt, size));
    const auto results = evaluate_selection(run, truth, ks);
    nlohmann::ordered_json per_method = nlohmann::ordered_json::object();
    table << "probe_size " << size << '\n';
    for (const auto& r : results) {
      nlohmann::ordered_json ndcg = nlohmann::ordered_json::object();
      nlohmann::ordered_json rel = nlohmann::ordered_json::object();
      for (const auto k : ks) {
        ndcg[std::to_string(k)] = r.ndcg_at.at(k);
        rel[std::to_string(k)] = r.rel_at.at(k);
      }
      per_method[r.method_id] = {{"ndcg", ndcg}, {"rel", rel}, {"seconds", run.result(r.method_id).seconds}};
    }
    grid.push_back({{"probe_size", size}, {"methods", std::move(per_method)}});
    table << format_evaluation_table(results);
    table << "seconds:";
    for (const auto& m : methods) table << ' ' << m << '=' << run.result(m).seconds;
    table << "\n\n";
  }
  if (opt.format == "table") {
    emit(opt, table.str(), out);
  } else {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["kind"] = "budget_sweep";
    auto config = common_config(opt, methods);
    config["probe_sizes"] = sizes;
    doc["config"] = config;
    doc["k"] = ks;
    doc["grid"] = std::move(grid);
    emit(opt, doc.dump(2) + "\n", out);
  }
  return kOk;
}

inline int cmd_sweep_zoo(const Options& opt, std::ostream& out) {
  const auto methods = resolve_methods(opt.methods);
  const ZooManifest manifest = load_manifest(opt.manifest);
  const GroundTruthTable truth = load_truth(opt.truth);
  const auto sizes = parse_sizes(opt.zoo_sizes, "--zoo-sizes");
  for (const auto s : sizes) {
    if (s > manifest.size()) {
      throw UsageError("zoo size " + std::to_string(s) + " exceeds the manifest's " +
                       std::to_string(manifest.size()) + " models");
    }
  }
  const auto ks = k_values_or(opt, {1, 5, 10});

  // Per-model scores do not depend on the rest of the zoo: score once, then
  // re-rank each manifest prefix.
  const SelectionRun full = score_zoo(manifest, base_dir_of(opt.manifest), methods, score_options(opt, opt.probe_size));
  nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
  std::ostringstream table;
  for (const auto s : sizes) {
    const ZooManifest prefix = manifest.prefix(s);
    std::vector<std::size_t> block_ks;
    for (const auto k : ks) {
      if (k <= s) block_ks.push_back(k);
    }
    if (block_ks.empty()) throw UsageError("no k value fits a zoo of " + std::to_string(s) + " models");
    const auto results = evaluate_selection(restrict_run(full, prefix), truth, block_ks);
    auto groups = group_aggregates(results);
    blocks.push_back({{"zoo_size", s},
                      {"k", block_ks},
                      {"methods", evaluation_to_json(results)},
                      {"groups", evaluation_to_json(groups)}});
    auto rows = results;
    rows.insert(rows.end(), groups.begin(), groups.end());
    table << "zoo_size " << s << '\n' << format_evaluation_table(rows) << '\n';
  }
  if (opt.format == "table") {
    emit(opt, table.str(), out);
  } else {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["kind"] = "zoo_sweep";
    auto config = common_config(opt, methods);
    config["probe_size"] = opt.probe_size;
    config["zoo_sizes"] = sizes;
    doc["config"] = config;
    doc["blocks"] = std::move(blocks);
    emit(opt, doc.dump(2) + "\n", out);
  }
  return kOk;
}

inline int cmd_gen_synthetic(const Options& opt, std::ostream& out) {
  ZooSpec spec = opt.zoo;
  spec.seed = opt.seed;
  if (opt.metadata == "correlated") {
    spec.metadata_mode = MetadataMode::correlated;
  } else if (opt.metadata == "decorrelated") {
    spec.metadata_mode = MetadataMode::decorrelated;
  } else {
    throw UsageError("--metadata must be 'correlated' or 'decorrelated'");
  }
  const SyntheticZoo zoo = generate_zoo(spec, opt.out_dir, thread_count_from_env());
  out << "wrote " << zoo.manifest.size() << " models to " << opt.out_dir << '\n';
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Rank a zoo of pre-trained models for a classification task from probe features"};
  app.require_subcommand(1);
  Options opt;

  const auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"json", "table"}));
    cmd->add_option("--out", opt.out, "Output file (default: stdout)");
  };
  const auto add_scoring = [&](CLI::App* cmd) {
    cmd->add_option("--manifest", opt.manifest, "Zoo manifest JSON")->required();
    cmd->add_option("--methods", opt.methods, "Comma-separated method ids (default: all)");
    cmd->add_option("--repeats", opt.repeats, "Sampling repeats")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opt.seed, "Global seed");
  };

  auto* score = app.add_subcommand("score", "Score every model of a zoo");
  add_scoring(score);
  score->add_option("--probe-size", opt.probe_size, "Probe samples per repeat")->check(CLI::PositiveNumber);
  add_format(score);

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a score report against ground truth");
  evaluate->add_option("--run", opt.run_report, "Score report JSON")->required();
  evaluate->add_option("--truth", opt.truth, "Ground-truth JSON")->required();
  evaluate->add_option("--k", opt.k_list, "Comma-separated k values (default 1,5,10)");
  add_format(evaluate);

  auto* budget = app.add_subcommand("sweep-budget", "Score and evaluate at several probe sizes");
  add_scoring(budget);
  budget->add_option("--truth", opt.truth, "Ground-truth JSON")->required();
  budget->add_option("--probe-sizes", opt.probe_sizes, "Comma-separated probe sizes");
  budget->add_option("--k", opt.k_list, "Comma-separated k values (default 5)");
  add_format(budget);

  auto* zoo = app.add_subcommand("sweep-zoo", "Evaluate on manifest prefixes of several sizes");
  add_scoring(zoo);
  zoo->add_option("--truth", opt.truth, "Ground-truth JSON")->required();
  zoo->add_option("--zoo-sizes", opt.zoo_sizes, "Comma-separated zoo sizes");
  zoo->add_option("--probe-size", opt.probe_size, "Probe samples per repeat")->check(CLI::PositiveNumber);
  zoo->add_option("--k", opt.k_list, "Comma-separated k values (default 1,5,10)");
  add_format(zoo);

  auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic zoo with known ground truth");
  gen->add_option("--out-dir", opt.out_dir, "Output directory")->required();
  gen->add_option("--models", opt.zoo.model_count, "Number of models");
  gen->add_option("--samples", opt.zoo.sample_count, "Samples per model");
  gen->add_option("--classes", opt.zoo.class_count, "Number of classes");
  gen->add_option("--dim", opt.zoo.feature_dim, "Feature dimension");
  gen->add_option("--quality-low", opt.zoo.quality_low, "Lower end of the quality range");
  gen->add_option("--quality-high", opt.zoo.quality_high, "Upper end of the quality range");
  gen->add_option("--noise", opt.zoo.noise_sigma, "Noise standard deviation");
  gen->add_option("--seed", opt.seed, "Generator seed");
  gen->add_option("--metadata", opt.metadata, "correlated|decorrelated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*score) return cmd_score(opt, out);
    if (*evaluate) return cmd_evaluate(opt, out);
    if (*budget) return cmd_sweep_budget(opt, out);
    if (*zoo) return cmd_sweep_zoo(opt, out);
    if (*gen) return cmd_gen_synthetic(opt, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}

}  // namespace pcmsel::cli
