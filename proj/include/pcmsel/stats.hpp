#pragma once

// Statistical kernels shared by the scorers: Pearson / Spearman correlation,
// covariance, class-conditional means, ridge-regularized inversion and
// pairwise 1 - Pearson dissimilarities.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pcmsel/error.hpp"

namespace pcmsel {

using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

namespace detail {

inline void check_pair(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DataError("correlation: length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
  if (a < 2) throw DataError("correlation: need at least 2 observations");
}

}  // namespace detail

// Pearson correlation. Returns 0 when either input has zero variance.
inline double pearson(std::span<const double> u, std::span<const double> v) {
  detail::check_pair(u.size(), v.size());
  const double n = static_cast<double>(u.size());
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double suv = 0.0;
  double suu = 0.0;
  double svv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i] - mu;
    const double b = v[i] - mv;
    suv += a * b;
    suu += a * a;
    svv += b * b;
  }
  if (suu == 0.0 || svv == 0.0) return 0.0;
  return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

namespace detail {

// Order-preserving map from a finite double to an unsigned key.
inline std::uint64_t sort_key(double x) {
  if (x == 0.0) x = 0.0;  // fold -0.0 onto +0.0
  const auto bits = std::bit_cast<std::uint64_t>(x);
  return (bits & 0x8000000000000000ULL) ? ~bits : (bits | 0x8000000000000000ULL);
}

struct KeyedIndex {
  std::uint64_t key;
  std::uint32_t index;
};

// LSD radix sort on 16-bit digits; passes whose digit is constant are skipped.
inline void radix_sort(std::vector<KeyedIndex>& items) {
  std::vector<KeyedIndex> scratch(items.size());
  std::vector<std::size_t> counts(1 << 16);
  for (int shift = 0; shift < 64; shift += 16) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto& it : items) ++counts[(it.key >> shift) & 0xffff];
    if (std::find(counts.begin(), counts.end(), items.size()) != counts.end()) continue;
    std::size_t offset = 0;
    for (auto& c : counts) {
      const std::size_t here = c;
      c = offset;
      offset += here;
    }
    for (const auto& it : items) scratch[counts[(it.key >> shift) & 0xffff]++] = it;
    items.swap(scratch);
  }
}

// LSD radix sort of plain keys below 2^key_bits, in as few equal-width passes
// of at most 12 bits as cover the key.
inline void radix_sort_keys(std::vector<std::uint64_t>& keys, int key_bits) {
  const int passes = std::max(1, (key_bits + 11) / 12);
  const int digit = (key_bits + passes - 1) / passes;
  const std::uint64_t mask = (std::uint64_t{1} << digit) - 1;
  std::vector<std::uint64_t> scratch(keys.size());
  std::vector<std::size_t> counts(std::size_t{1} << digit);
  for (int shift = 0; shift < passes * digit; shift += digit) {
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto k : keys) ++counts[(k >> shift) & mask];
    std::size_t offset = 0;
    for (auto& c : counts) {
      const std::size_t here = c;
      c = offset;
      offset += here;
    }
    for (const auto k : keys) scratch[counts[(k >> shift) & mask]++] = k;
    keys.swap(scratch);
  }
}

}  // namespace detail

// 1-based fractional ranks; tied values share the average of their ranks.
inline std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n > std::numeric_limits<std::uint32_t>::max()) throw DataError("ranking: input too large");
  std::vector<detail::KeyedIndex> items(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(values[i])) throw DataError("ranking: non-finite value at index " + std::to_string(i));
    items[i] = {detail::sort_key(values[i]), static_cast<std::uint32_t>(i)};
  }
  if (n < 4096) {
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  } else {
    detail::radix_sort(items);
  }
  std::vector<double> ranks(n);
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && items[end].key == items[start].key) ++end;
    const double rank = 0.5 * static_cast<double>(start + 1 + end);  // mean of start+1 .. end
    for (std::size_t i = start; i < end; ++i) ranks[items[i].index] = rank;
    start = end;
  }
  return ranks;
}

inline double spearman(std::span<const double> u, std::span<const double> v) {
  detail::check_pair(u.size(), v.size());
  const auto ru = fractional_ranks(u);
  const auto rv = fractional_ranks(v);
  return pearson(ru, rv);
}

// Sample covariance (divisor n - 1) of the rows of `x`. Rows are consumed in
// blocks whose centered co-moments are merged pairwise (Chan et al.), so the
// data is read once and every block product runs through GEMM.
inline Matrix covariance_matrix(const Eigen::Ref<const Matrix>& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n < 2) throw DataError("covariance: need at least 2 rows");
  constexpr Eigen::Index kBlock = 512;

  Vector mean = Vector::Zero(d);
  Matrix comoment = Matrix::Zero(d, d);
  double count = 0.0;
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, n - start);
    const auto block = x.middleRows(start, rows);
    const Vector block_mean = block.colwise().mean().transpose();
    const Matrix centered = block.rowwise() - block_mean.transpose();
    Matrix block_comoment = Matrix::Zero(d, d);
    block_comoment.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
    block_comoment = block_comoment.selfadjointView<Eigen::Lower>();

    const double nb = static_cast<double>(rows);
    const double total = count + nb;
    const Vector delta = block_mean - mean;
    comoment += block_comoment + (count * nb / total) * (delta * delta.transpose());
    mean += (nb / total) * delta;
    count = total;
  }
  Matrix cov = comoment / (count - 1.0);
  return 0.5 * (cov + cov.transpose());
}

struct ClassMeans {
  Matrix means;               // one row per present class, ascending label order
  std::vector<std::uint32_t> classes;  // label of each row
};

// Mean feature vector per class present in `labels`. Absent classes are
// dropped; classes.size() is the reduced class count.
inline ClassMeans class_conditional_means(const Eigen::Ref<const Matrix>& features,
                                          std::span<const std::uint32_t> labels) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw DataError("class means: row/label count mismatch");
  }
  if (labels.empty()) throw DataError("class means: empty input");
  const std::uint32_t max_label = *std::max_element(labels.begin(), labels.end());
  Matrix sums = Matrix::Zero(max_label + 1, features.cols());
  std::vector<std::size_t> counts(max_label + 1, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sums.row(labels[i]) += features.row(static_cast<Eigen::Index>(i));
    ++counts[labels[i]];
  }
  ClassMeans out;
  for (std::uint32_t c = 0; c <= max_label; ++c) {
    if (counts[c] > 0) out.classes.push_back(c);
  }
  out.means.resize(static_cast<Eigen::Index>(out.classes.size()), features.cols());
  for (std::size_t r = 0; r < out.classes.size(); ++r) {
    const auto c = out.classes[r];
    out.means.row(static_cast<Eigen::Index>(r)) = sums.row(c) / static_cast<double>(counts[c]);
  }
  return out;
}

inline constexpr double kDefaultGammaScale = 1e-6;

// (m + gamma I)^-1 with gamma = gamma_scale * trace(m) / d, or gamma_scale
// itself when the trace is zero.
inline Matrix regularized_inverse(const Eigen::Ref<const Matrix>& m, double gamma_scale = kDefaultGammaScale) {
  if (m.rows() != m.cols()) throw DataError("regularized_inverse: matrix is not square");
  if (gamma_scale < 0.0) throw DataError("regularized_inverse: gamma_scale must be >= 0");
  const Eigen::Index d = m.rows();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DataError("regularized_inverse: matrix is not symmetric");
  }
  const double trace = m.trace();
  const double gamma = trace != 0.0 ? gamma_scale * trace / static_cast<double>(d) : gamma_scale;
  const Matrix shifted = m + gamma * Matrix::Identity(d, d);
  Eigen::LDLT<Matrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("regularized_inverse: shifted matrix is not positive definite");
  }
  const auto diag = ldlt.vectorD();
  if (diag.minCoeff() <= diag.maxCoeff() * 1e-15 * static_cast<double>(d)) {
    throw NumericalError("regularized_inverse: matrix is singular; increase gamma_scale");
  }
  Matrix inv = ldlt.solve(Matrix::Identity(d, d));
  return 0.5 * (inv + inv.transpose());
}

struct DissimilarityMatrix {
  enum class Kind { feature, label };
  Matrix values;
  Kind kind = Kind::feature;
};

namespace detail {

// Rows centered and scaled to unit norm; zero-variance rows become zero.
inline RowMatrix normalized_rows(const Eigen::Ref<const Matrix>& rows) {
  RowMatrix z = rows;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    auto r = z.row(i);
    r.array() -= r.mean();
    const double norm = r.norm();
    if (norm > 0.0) {
      r /= norm;
    } else {
      r.setZero();
    }
  }
  return z;
}

// Dissimilarities are rounded to a 2^-32 grid so values that agree up to
// floating-point noise tie exactly, which rank correlation depends on. Grid
// values are also exact integers once scaled, which PARC sorts directly.
constexpr double kDissimilarityGrid = 4294967296.0;  // 2^32

inline double snap_dissimilarity(double s) { return std::round(s * kDissimilarityGrid) / kDissimilarityGrid; }

template <typename Sink>
void for_each_upper_pair(const Eigen::Ref<const Matrix>& rows, Sink&& sink) {
  const Eigen::Index n = rows.rows();
  if (n < 2) throw DataError("pairwise dissimilarity: need at least 2 rows");
  if (rows.cols() < 2) throw DataError("pairwise dissimilarity: need at least 2 columns (d >= 2)");
  const RowMatrix z = normalized_rows(rows);
  constexpr Eigen::Index kBlock = 256;
  Matrix gram;
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const Eigen::Index count = std::min(kBlock, n - start);
    gram.noalias() = z.middleRows(start, count) * z.bottomRows(n - start).transpose();
    for (Eigen::Index a = 0; a < count; ++a) {
      const Eigen::Index i = start + a;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        sink(i, j, snap_dissimilarity(1.0 - std::clamp(gram(a, j - start), -1.0, 1.0)));
      }
    }
  }
}

}  // namespace detail

// Entries (i, j) for i < j of the pairwise 1 - Pearson matrix, row-major.
inline std::vector<double> upper_triangle_dissimilarity(const Eigen::Ref<const Matrix>& rows) {
  const auto n = static_cast<std::size_t>(rows.rows());
  std::vector<double> out;
  out.reserve(n * (n - 1) / 2);
  detail::for_each_upper_pair(rows, [&](Eigen::Index, Eigen::Index, double s) { out.push_back(s); });
  return out;
}

inline DissimilarityMatrix pairwise_dissimilarity(const Eigen::Ref<const Matrix>& rows,
                                                  DissimilarityMatrix::Kind kind = DissimilarityMatrix::Kind::feature) {
  DissimilarityMatrix out;
  out.kind = kind;
  out.values = Matrix::Zero(rows.rows(), rows.rows());
  detail::for_each_upper_pair(rows, [&](Eigen::Index i, Eigen::Index j, double s) {
    out.values(i, j) = s;
    out.values(j, i) = s;
  });
  return out;
}

}  // namespace pcmsel
