#pragma once

// Synthetic model zoos with known ground truth.
//
// Model j gets a scalar quality q_j. Its features are Gaussian class clusters
// whose means sit on a sphere of radius q_j * 4 * sigma; all models share the
// same labels (the same underlying "samples"). The ground-truth accuracy of
// model j is the held-out accuracy of the linear proxy trained on a fresh,
// ten times larger sample of that model's feature distribution.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "pcmsel/error.hpp"
#include "pcmsel/parallel.hpp"
#include "pcmsel/proxy.hpp"
#include "pcmsel/random.hpp"
#include "pcmsel/selection.hpp"
#include "pcmsel/zoo_data.hpp"

namespace pcmsel {

enum class MetadataMode { correlated, decorrelated };

struct ZooSpec {
  std::size_t model_count = 30;
  std::size_t sample_count = 2000;
  std::uint32_t class_count = 4;
  std::size_t feature_dim = 16;
  double quality_low = 0.1;
  double quality_high = 0.9;
  double noise_sigma = 1.0;
  std::uint64_t seed = 42;
  MetadataMode metadata_mode = MetadataMode::decorrelated;

  void validate() const {
    if (model_count < 2) throw UsageError("synthetic zoo: model_count must be >= 2");
    if (class_count < 2) throw UsageError("synthetic zoo: class_count must be >= 2");
    if (sample_count < 10 * static_cast<std::size_t>(class_count)) {
      throw UsageError("synthetic zoo: sample_count must be >= 10 * class_count");
    }
    if (feature_dim < 2) throw UsageError("synthetic zoo: feature_dim must be >= 2");
    if (!(quality_low >= 0.0 && quality_low <= quality_high && quality_high <= 1.0)) {
      throw UsageError("synthetic zoo: quality range must satisfy 0 <= low <= high <= 1");
    }
    if (!(noise_sigma > 0.0)) throw UsageError("synthetic zoo: noise_sigma must be > 0");
  }
};

struct SyntheticZoo {
  ZooManifest manifest;
  GroundTruthTable truth;
  std::vector<double> qualities;  // q_j in manifest order
};

inline std::string synthetic_model_id(std::size_t j) {
  std::string digits = std::to_string(j);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "synth-" + digits;
}

namespace detail {

inline std::vector<Label> balanced_labels(std::size_t n, std::uint32_t classes, Rng& rng) {
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<Label>(i % classes);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

inline FeatureMatrix cluster_features(const Matrix& means, std::span<const Label> labels, double sigma, Rng& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  FeatureMatrix f(static_cast<Eigen::Index>(labels.size()), means.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (Eigen::Index c = 0; c < means.cols(); ++c) {
      f(static_cast<Eigen::Index>(i), c) = static_cast<float>(means(labels[i], c) + noise(rng));
    }
  }
  return f;
}

}  // namespace detail

// Writes features/<model_id>.fmx, manifest.json and truth.json under out_dir.
inline SyntheticZoo generate_zoo(const ZooSpec& spec, const std::filesystem::path& out_dir, unsigned threads = 1) {
  spec.validate();
  const std::size_t m = spec.model_count;
  Rng master = make_rng({spec.seed, 0x7a6f6fULL});

  const std::vector<Label> labels = detail::balanced_labels(spec.sample_count, spec.class_count, master);
  std::uniform_real_distribution<double> quality(spec.quality_low, spec.quality_high);
  std::vector<double> q(m);
  for (auto& v : q) v = spec.quality_low == spec.quality_high ? spec.quality_low : quality(master);

  // Metadata ranks: rank 0 gets the smallest size.
  std::vector<std::size_t> size_rank(m);
  std::vector<std::size_t> data_rank(m);
  if (spec.metadata_mode == MetadataMode::correlated) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q[a] < q[b]; });
    for (std::size_t r = 0; r < m; ++r) size_rank[order[r]] = data_rank[order[r]] = r;
  } else {
    std::iota(size_rank.begin(), size_rank.end(), std::size_t{0});
    std::iota(data_rank.begin(), data_rank.end(), std::size_t{0});
    std::shuffle(size_rank.begin(), size_rank.end(), master);
    std::shuffle(data_rank.begin(), data_rank.end(), master);
  }

  SyntheticZoo zoo;
  zoo.qualities = q;
  zoo.manifest.version = 1;
  zoo.manifest.task_id = "synthetic-" + std::to_string(spec.seed);
  zoo.manifest.label_count = spec.class_count;
  zoo.manifest.metadata_unit = "synthetic tokens";
  for (std::size_t j = 0; j < m; ++j) {
    ModelRecord r;
    r.model_id = synthetic_model_id(j);
    r.display_name = "Synthetic model " + std::to_string(j);
    r.param_count = static_cast<std::int64_t>(size_rank[j] + 1) * 10'000'000;
    r.pretrain_dataset_size = static_cast<std::int64_t>(data_rank[j] + 1) * 100'000'000;
    r.feature_path = "features/" + r.model_id + ".fmx";
    r.tags = {"synthetic"};
    zoo.manifest.models.push_back(std::move(r));
  }
  zoo.truth.task_id = zoo.manifest.task_id;

  const double radius_unit = 4.0 * spec.noise_sigma;
  std::vector<double> truth(m);
  parallel_for(m, threads, [&](std::size_t j) {
    Rng rng = make_rng({spec.seed, static_cast<std::uint64_t>(j), 0x6d6f64656cULL});
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix means(spec.class_count, static_cast<Eigen::Index>(spec.feature_dim));
    for (Eigen::Index c = 0; c < means.rows(); ++c) {
      for (Eigen::Index k = 0; k < means.cols(); ++k) means(c, k) = gauss(rng);
      means.row(c) *= q[j] * radius_unit / means.row(c).norm();
    }

    ProbeDataset ds;
    ds.model_id = zoo.manifest.models[j].model_id;
    ds.label_count = spec.class_count;
    ds.labels = labels;
    ds.features = detail::cluster_features(means, labels, spec.noise_sigma, rng);
    save_features(ds, out_dir / zoo.manifest.models[j].feature_path);

    ProbeDataset oracle;
    oracle.model_id = ds.model_id;
    oracle.label_count = spec.class_count;
    oracle.labels = detail::balanced_labels(10 * spec.sample_count, spec.class_count, rng);
    oracle.features = detail::cluster_features(means, oracle.labels, spec.noise_sigma, rng);
    ProxyConfig cfg;
    cfg.method = ProxyMethod::linear;
    cfg.seed = spec.seed;
    truth[j] = score_linear(oracle, cfg).value;
  });
  for (std::size_t j = 0; j < m; ++j) zoo.truth.entries[zoo.manifest.models[j].model_id] = truth[j];

  save_manifest(zoo.manifest, out_dir / "manifest.json");
  // Degenerate quality ranges can give equal accuracies; write the table anyway.
  write_file_atomic(out_dir / "truth.json", truth_to_json(zoo.truth).dump(2) + "\n");
  return zoo;
}

// Ground-truth ordering: accuracy descending, manifest order on ties.
inline RankedList truth_ordering(const GroundTruthTable& truth, const ZooManifest& manifest) {
  std::vector<TransferabilityScore> scores;
  for (const auto& rec : manifest.models) {
    TransferabilityScore s;
    s.model_id = rec.model_id;
    s.method_id = "truth";
    s.value = truth.accuracy(rec.model_id);
    scores.push_back(std::move(s));
  }
  RankedList out = rank_models(scores, manifest, manifest.size());
  out.task_id = truth.task_id;
  return out;
}

}  // namespace pcmsel
