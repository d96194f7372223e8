#pragma once

// Distribution-based transferability: compare the structure of a model's
// feature space with the structure of the label space, no training involved.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pcmsel/error.hpp"
#include "pcmsel/proxy.hpp"
#include "pcmsel/stats.hpp"
#include "pcmsel/zoo_data.hpp"

namespace pcmsel {

struct LabelEncoding {
  Matrix one_hot;  // n x C, exactly one 1 per row

  static LabelEncoding from_labels(std::span<const Label> labels, std::uint32_t class_count) {
    LabelEncoding enc;
    enc.one_hot = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), class_count);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= class_count) throw DataError("label encoding: label out of range");
      enc.one_hot(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return enc;
  }
};

// PARC: Spearman correlation between the strict upper triangles of the
// pairwise 1 - Pearson dissimilarity matrices of the feature rows and of the
// one-hot label rows.
inline double parc_value(const Eigen::Ref<const Matrix>& features, std::span<const Label> labels,
                         std::uint32_t class_count) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw DataError("PARC: row/label count mismatch");
  }
  if (labels.size() < 3) throw DataError("PARC: need at least 3 samples");
  if (class_count < 2) throw DataError("PARC: need at least 2 label classes");
  if (std::all_of(labels.begin(), labels.end(), [&](Label y) { return y == labels.front(); })) {
    throw DataError("PARC: degenerate task, all labels are equal");
  }
  if (*std::max_element(labels.begin(), labels.end()) >= class_count) {
    throw DataError("PARC: label outside [0, " + std::to_string(class_count) + ")");
  }
  // Two distinct one-hot rows always correlate at -1/(C-1), so the label side
  // only separates same-class pairs from the rest. Its Spearman correlation
  // with the feature side is then minus the Pearson correlation between the
  // feature-side ranks and a same-class indicator. Snapped feature values are
  // whole multiples of the grid step; each key is that multiple with the
  // indicator in its low bit, so sorting the keys groups ties together.
  const std::size_t n = labels.size();
  std::vector<std::uint64_t> keys;
  keys.reserve(n * (n - 1) / 2);
  detail::for_each_upper_pair(features, [&](Eigen::Index i, Eigen::Index j, double s) {
    const auto step = static_cast<std::uint64_t>(s * detail::kDissimilarityGrid);
    keys.push_back(step << 1 | (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]));
  });
  detail::radix_sort_keys(keys, std::bit_width(*std::max_element(keys.begin(), keys.end())));

  // Ranks are centred on their mean, so they sum to zero.
  const double m = static_cast<double>(keys.size());
  const double mid = 0.5 * (m + 1.0);
  double same = 0.0;
  double sum_cc = 0.0;
  double sum_c_same = 0.0;
  std::size_t groups = 0;
  bool split_matches = true;  // every tie group is all same-class or all cross-class
  for (std::size_t start = 0; start < keys.size(); ++groups) {
    std::size_t end = start + 1;
    std::size_t hits = keys[start] & 1;
    while (end < keys.size() && (keys[end] >> 1) == (keys[start] >> 1)) hits += keys[end++] & 1;
    const double c = 0.5 * static_cast<double>(start + 1 + end) - mid;
    const double g = static_cast<double>(end - start);
    split_matches = split_matches && (hits == 0 || hits == end - start);
    same += static_cast<double>(hits);
    sum_cc += c * c * g;
    sum_c_same += c * static_cast<double>(hits);
    start = end;
  }
  const double var_same = same - same * same / m;
  if (sum_cc <= 0.0 || var_same <= 0.0) return 0.0;
  // Two pure groups: the rank vector is an affine image of the indicator.
  if (groups == 2 && split_matches) return (keys.front() & 1) ? 1.0 : -1.0;
  return std::clamp(-sum_c_same / std::sqrt(sum_cc * var_same), -1.0, 1.0);
}

inline TransferabilityScore score_parc(const ProbeDataset& ds) {
  const detail::Stopwatch clock;
  const std::uint32_t classes =
      std::max(ds.label_count, *std::max_element(ds.labels.begin(), ds.labels.end()) + 1);
  const double value = parc_value(ds.features.cast<double>(), ds.labels, classes);
  return detail::single_score(ds, "parc", value, clock.seconds());
}

// H-Score: tr(inv(S_f) * S_b), where S_f is the feature covariance and S_b the
// covariance of the n x d matrix whose i-th row is the mean feature of sample
// i's class. inv() is the ridge-regularized inverse.
inline double hscore_value(const Eigen::Ref<const Matrix>& features, std::span<const Label> labels,
                           double gamma_scale = kDefaultGammaScale) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (n != labels.size()) throw DataError("H-Score: row/label count mismatch");
  const ClassMeans means = class_conditional_means(features, labels);
  const std::size_t classes = means.classes.size();
  if (classes < 2) throw DataError("H-Score: degenerate task, fewer than 2 classes present");
  if (n < classes + 1) {
    throw DataError("H-Score: need n >= C + 1 samples (n=" + std::to_string(n) + ", C=" + std::to_string(classes) + ")");
  }

  const Matrix feature_cov = covariance_matrix(features);
  if (feature_cov.trace() == 0.0) throw DataError("H-Score: degenerate features, every column is constant");

  // Covariance of the per-sample class-mean matrix, accumulated per class:
  // each class mean appears n_c times around the overall mean.
  std::vector<double> counts(classes, 0.0);
  for (const Label y : labels) {
    const auto it = std::lower_bound(means.classes.begin(), means.classes.end(), y);
    counts[static_cast<std::size_t>(it - means.classes.begin())] += 1.0;
  }
  const Vector overall = features.colwise().mean().transpose();
  Matrix centered = means.means.rowwise() - overall.transpose();
  for (std::size_t c = 0; c < classes; ++c) centered.row(static_cast<Eigen::Index>(c)) *= std::sqrt(counts[c]);
  Matrix between = (centered.transpose() * centered) / static_cast<double>(n - 1);
  between = 0.5 * (between + between.transpose());

  const Matrix inv = regularized_inverse(feature_cov, gamma_scale);
  return inv.cwiseProduct(between.transpose()).sum();
}

inline TransferabilityScore score_hscore(const ProbeDataset& ds, double gamma_scale = kDefaultGammaScale) {
  const detail::Stopwatch clock;
  const double value = hscore_value(ds.features.cast<double>(), ds.labels, gamma_scale);
  return detail::single_score(ds, "hscore", value, clock.seconds());
}

}  // namespace pcmsel
