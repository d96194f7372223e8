#pragma once

// Proxy-based transferability: fit a shallow classifier on a model's probe
// features and report its held-out accuracy as the model's score.
//
// Three proxies are provided, all on a stratified train/test split with
// train-statistics z-scoring:
//   * k-nearest neighbours (Euclidean, majority vote),
//   * multinomial logistic regression trained by full-batch gradient descent,
//   * linear soft-margin SVM (dual coordinate descent, one-vs-rest).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pcmsel/error.hpp"
#include "pcmsel/random.hpp"
#include "pcmsel/stats.hpp"
#include "pcmsel/zoo_data.hpp"

namespace pcmsel {

enum class ProxyMethod { knn, linear, svm };

struct LinearParams {
  double learning_rate = 0.1;
  int max_iters = 300;
  double grad_tol = 1e-4;
};

struct SvmParams {
  double c = 1.0;
  int max_iters = 1000;  // epochs over the training set
  double tol = 1e-3;     // relative duality gap
};

struct ProxyConfig {
  ProxyMethod method = ProxyMethod::knn;
  int k = 1;
  double train_fraction = 0.7;
  bool standardize = true;
  std::uint64_t seed = 0;
  LinearParams linear;
  SvmParams svm;

  std::string method_id() const {
    switch (method) {
      case ProxyMethod::knn: return "knn" + std::to_string(k);
      case ProxyMethod::linear: return "linear";
      case ProxyMethod::svm: return "svm";
    }
    return "?";
  }

  void validate() const {
    if (method == ProxyMethod::knn && (k < 1 || k % 2 == 0)) {
      throw UsageError("kNN proxy: k must be an odd integer >= 1, got " + std::to_string(k));
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
      throw UsageError("proxy: train_fraction must lie in (0, 1)");
    }
    if (!(svm.c > 0.0)) throw UsageError("SVM proxy: C must be > 0");
    if (linear.max_iters < 0 || svm.max_iters < 1) throw UsageError("proxy: iteration caps must be positive");
    if (!(linear.learning_rate > 0.0)) throw UsageError("linear proxy: learning_rate must be > 0");
  }
};

struct TransferabilityScore {
  std::string model_id;
  std::string method_id;
  double value = 0.0;               // mean of per_repeat
  std::vector<double> per_repeat;
  double wall_clock_seconds = 0.0;  // scoring time summed over repeats
  int unconverged_repeats = 0;      // iterative proxies that hit their iteration cap
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline TransferabilityScore single_score(const ProbeDataset& ds, std::string method_id, double value,
                                         double seconds, bool converged = true) {
  TransferabilityScore s;
  s.model_id = ds.model_id;
  s.method_id = std::move(method_id);
  s.value = value;
  s.per_repeat = {value};
  s.wall_clock_seconds = seconds;
  s.unconverged_repeats = converged ? 0 : 1;
  return s;
}

}  // namespace detail

// Per-column z-scoring with statistics of the fitted matrix. Columns with zero
// spread are centered only.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Eigen::Ref<const Matrix>& x) {
    Standardizer s;
    const double n = static_cast<double>(x.rows());
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double var = (x.col(c).array() - s.mean(c)).square().sum() / n;
      s.scale(c) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
  }

  void apply(Matrix& x) const {
    x = ((x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
  }
};

struct ProxySplit {
  Matrix train_x;
  std::vector<Label> train_y;
  Matrix test_x;
  std::vector<Label> test_y;
};

inline ProxySplit make_proxy_split(const ProbeDataset& ds, const ProxyConfig& config) {
  const SplitIndices idx = stratified_split_indices(ds.labels, config.train_fraction, config.seed);
  ProxySplit out;
  const auto gather = [&](const IndexList& rows, Matrix& x, std::vector<Label>& y) {
    x.resize(static_cast<Eigen::Index>(rows.size()), ds.features.cols());
    y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = ds.features.row(static_cast<Eigen::Index>(rows[i])).cast<double>();
      y[i] = ds.labels[rows[i]];
    }
  };
  gather(idx.train, out.train_x, out.train_y);
  gather(idx.test, out.test_x, out.test_y);
  if (config.standardize) {
    const auto s = Standardizer::fit(out.train_x);
    s.apply(out.train_x);
    s.apply(out.test_x);
  }
  return out;
}

inline double accuracy(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size() || truth.empty()) throw DataError("accuracy: size mismatch or empty");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

// ---------------------------------------------------------------------------
// k-nearest neighbours
// ---------------------------------------------------------------------------

// Distance ties go to the smaller train index. Vote ties go to the class with
// the smaller summed distance, then to the smaller class index.
inline std::vector<Label> knn_predict(const Eigen::Ref<const Matrix>& train_x, std::span<const Label> train_y,
                                      const Eigen::Ref<const Matrix>& test_x, int k) {
  const auto n_train = static_cast<std::size_t>(train_x.rows());
  if (k < 1 || static_cast<std::size_t>(k) > n_train) {
    throw DataError("kNN: k=" + std::to_string(k) + " exceeds train-set size " + std::to_string(n_train));
  }
  const Label max_label = *std::max_element(train_y.begin(), train_y.end());
  const RowMatrix train = train_x;
  const RowMatrix test = test_x;
  const auto d = train.cols();

  std::vector<Label> out(static_cast<std::size_t>(test.rows()));
  std::vector<double> dist(n_train);
  std::vector<std::uint32_t> order(n_train);
  std::vector<int> votes(max_label + 1);
  std::vector<double> dist_sum(max_label + 1);
  for (Eigen::Index t = 0; t < test.rows(); ++t) {
    const double* q = test.row(t).data();
    for (std::size_t i = 0; i < n_train; ++i) {
      const double* p = train.row(static_cast<Eigen::Index>(i)).data();
      double acc = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double diff = q[c] - p[c];
        acc += diff * diff;
      }
      dist[i] = acc;
    }
    std::iota(order.begin(), order.end(), 0U);
    const auto closer = [&](std::uint32_t a, std::uint32_t b) {
      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);

    std::fill(votes.begin(), votes.end(), 0);
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (int j = 0; j < k; ++j) {
      const auto i = order[static_cast<std::size_t>(j)];
      ++votes[train_y[i]];
      dist_sum[train_y[i]] += std::sqrt(dist[i]);
    }
    Label best = 0;
    for (Label c = 1; c <= max_label; ++c) {
      if (votes[c] > votes[best] || (votes[c] == votes[best] && dist_sum[c] < dist_sum[best])) best = c;
    }
    out[static_cast<std::size_t>(t)] = best;
  }
  return out;
}

inline TransferabilityScore score_knn(const ProbeDataset& ds, const ProxyConfig& config) {
  config.validate();
  require_two_classes(ds);
  const detail::Stopwatch clock;
  const ProxySplit split = make_proxy_split(ds, config);
  const auto predicted = knn_predict(split.train_x, split.train_y, split.test_x, config.k);
  const double acc = accuracy(predicted, split.test_y);
  return detail::single_score(ds, config.method_id(), acc, clock.seconds());
}

// ---------------------------------------------------------------------------
// Linear (softmax) proxy
// ---------------------------------------------------------------------------

struct LinearModel {
  Matrix weights;  // d x C
  Vector bias;     // C
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;

  std::vector<Label> predict(const Eigen::Ref<const Matrix>& x) const {
    const Matrix logits = (x * weights).rowwise() + bias.transpose();
    std::vector<Label> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      Eigen::Index arg = 0;
      logits.row(r).maxCoeff(&arg);
      out[static_cast<std::size_t>(r)] = static_cast<Label>(arg);
    }
    return out;
  }
};

// Mean cross-entropy minimised by full-batch gradient descent from zero
// weights. Stops when the gradient norm drops below grad_tol.
inline LinearModel train_linear(const Eigen::Ref<const Matrix>& x, std::span<const Label> y,
                                std::uint32_t class_count, const LinearParams& params) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const auto c = static_cast<Eigen::Index>(class_count);
  Matrix onehot = Matrix::Zero(n, c);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, y[static_cast<std::size_t>(i)]) = 1.0;

  LinearModel model;
  model.weights = Matrix::Zero(d, c);
  model.bias = Vector::Zero(c);
  Matrix prob(n, c);
  for (int iter = 0;; ++iter) {
    prob.noalias() = x * model.weights;
    prob.rowwise() += model.bias.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      auto row = prob.row(i);
      row.array() = (row.array() - row.maxCoeff()).exp();
      row /= row.sum();
    }
    prob -= onehot;
    const Matrix grad_w = (x.transpose() * prob) / static_cast<double>(n);
    const Vector grad_b = prob.colwise().sum().transpose() / static_cast<double>(n);
    model.grad_norm = std::sqrt(grad_w.squaredNorm() + grad_b.squaredNorm());
    model.iterations = iter;
    if (model.grad_norm < params.grad_tol) {
      model.converged = true;
      break;
    }
    if (iter >= params.max_iters) break;
    model.weights -= params.learning_rate * grad_w;
    model.bias -= params.learning_rate * grad_b;
  }
  return model;
}

inline TransferabilityScore score_linear(const ProbeDataset& ds, const ProxyConfig& config) {
  config.validate();
  require_two_classes(ds);
  const detail::Stopwatch clock;
  const ProxySplit split = make_proxy_split(ds, config);
  const std::uint32_t classes =
      std::max(ds.label_count, *std::max_element(ds.labels.begin(), ds.labels.end()) + 1);
  const LinearModel model = train_linear(split.train_x, split.train_y, classes, config.linear);
  const double acc = accuracy(model.predict(split.test_x), split.test_y);
  return detail::single_score(ds, "linear", acc, clock.seconds(), model.converged);
}

// ---------------------------------------------------------------------------
// Linear SVM
// ---------------------------------------------------------------------------

struct BinarySvm {
  Vector w;  // d weights followed by the bias term
  int epochs = 0;
  double duality_gap = 0.0;
  bool converged = false;

  double margin(const Eigen::Ref<const RowMatrix>& x, Eigen::Index row) const {
    const Eigen::Index d = x.cols();
    return x.row(row).dot(w.head(d).transpose()) + w(d);
  }
};

// Dual coordinate descent for the L1-loss soft-margin SVM with the bias folded
// in as a constant feature. `signs` holds +1 / -1 targets. Convergence is
// declared when (primal - dual) <= tol * max(1, primal).
inline BinarySvm train_binary_svm(const Eigen::Ref<const RowMatrix>& x, std::span<const double> signs,
                                  const SvmParams& params, Rng& rng) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const double cap = params.c;
  BinarySvm model;
  model.w = Vector::Zero(d + 1);
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  std::vector<double> q_diag(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) q_diag[static_cast<std::size_t>(i)] = x.row(i).squaredNorm() + 1.0;
  std::vector<std::uint32_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0U);

  for (int epoch = 1; epoch <= params.max_iters; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const auto i : order) {
      const double yi = signs[i];
      const double grad = yi * model.margin(x, i) - 1.0;
      double& a = alpha[i];
      const double projected = a == 0.0 ? std::min(grad, 0.0) : (a == cap ? std::max(grad, 0.0) : grad);
      if (projected == 0.0) continue;
      const double updated = std::clamp(a - grad / q_diag[i], 0.0, cap);
      const double step = (updated - a) * yi;
      model.w.head(d) += step * x.row(i).transpose();
      model.w(d) += step;
      a = updated;
    }

    const double half_w2 = 0.5 * model.w.squaredNorm();
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      hinge += std::max(0.0, 1.0 - signs[static_cast<std::size_t>(i)] * model.margin(x, i));
    }
    const double primal = half_w2 + cap * hinge;
    const double dual = std::accumulate(alpha.begin(), alpha.end(), 0.0) - half_w2;
    model.epochs = epoch;
    model.duality_gap = primal - dual;
    if (model.duality_gap <= params.tol * std::max(1.0, primal)) {
      model.converged = true;
      break;
    }
  }
  return model;
}

struct SvmClassifier {
  std::vector<Label> classes;     // classes seen in training, ascending
  std::vector<BinarySvm> models;  // 1 model for 2 classes, else one per class
  bool converged = true;

  std::vector<Label> predict(const Eigen::Ref<const RowMatrix>& x) const {
    std::vector<Label> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      if (models.size() == 1) {
        out[static_cast<std::size_t>(r)] = models[0].margin(x, r) > 0.0 ? classes[1] : classes[0];
        continue;
      }
      std::size_t best = 0;
      double best_margin = models[0].margin(x, r);
      for (std::size_t m = 1; m < models.size(); ++m) {
        const double mg = models[m].margin(x, r);
        if (mg > best_margin) {
          best_margin = mg;
          best = m;
        }
      }
      out[static_cast<std::size_t>(r)] = classes[best];
    }
    return out;
  }
};

inline SvmClassifier train_svm(const Eigen::Ref<const Matrix>& x, std::span<const Label> y, const SvmParams& params,
                               std::uint64_t seed) {
  SvmClassifier clf;
  clf.classes.assign(y.begin(), y.end());
  std::sort(clf.classes.begin(), clf.classes.end());
  clf.classes.erase(std::unique(clf.classes.begin(), clf.classes.end()), clf.classes.end());
  if (clf.classes.size() < 2) throw DataError("SVM: training split holds a single class");

  const RowMatrix rows = x;
  const std::size_t problems = clf.classes.size() == 2 ? 1 : clf.classes.size();
  std::vector<double> signs(y.size());
  for (std::size_t p = 0; p < problems; ++p) {
    const Label positive = clf.classes.size() == 2 ? clf.classes[1] : clf.classes[p];
    for (std::size_t i = 0; i < y.size(); ++i) signs[i] = y[i] == positive ? 1.0 : -1.0;
    Rng rng = make_rng({seed, 0x5356ULL, p});
    clf.models.push_back(train_binary_svm(rows, signs, params, rng));
    clf.converged = clf.converged && clf.models.back().converged;
  }
  return clf;
}

inline TransferabilityScore score_svm(const ProbeDataset& ds, const ProxyConfig& config) {
  config.validate();
  require_two_classes(ds);
  const detail::Stopwatch clock;
  const ProxySplit split = make_proxy_split(ds, config);
  const SvmClassifier clf = train_svm(split.train_x, split.train_y, config.svm, config.seed);
  const RowMatrix test = split.test_x;
  const double acc = accuracy(clf.predict(test), split.test_y);
  return detail::single_score(ds, "svm", acc, clock.seconds(), clf.converged);
}

inline TransferabilityScore score_proxy(const ProbeDataset& ds, const ProxyConfig& config) {
  switch (config.method) {
    case ProxyMethod::knn: return score_knn(ds, config);
    case ProxyMethod::linear: return score_linear(ds, config);
    case ProxyMethod::svm: return score_svm(ds, config);
  }
  throw UsageError("unknown proxy method");
}

}  // namespace pcmsel
