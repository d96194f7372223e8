#pragma once

// Brute-force reference implementations used only by tests. They share no
// code with the library: plain loops over nested vectors, O(n^2) ranking,
// Gauss-Jordan inversion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

namespace oracle {

using Rows = std::vector<std::vector<double>>;

inline double pearson(const std::vector<double>& u, const std::vector<double>& v) {
  const double n = static_cast<double>(u.size());
  double su = 0, sv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    su += u[i];
    sv += v[i];
  }
  const double mu = su / n, mv = sv / n;
  double num = 0, du = 0, dv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    num += (u[i] - mu) * (v[i] - mv);
    du += (u[i] - mu) * (u[i] - mu);
    dv += (v[i] - mv) * (v[i] - mv);
  }
  if (du == 0 || dv == 0) return 0.0;
  return num / std::sqrt(du * dv);
}

// rank = (#smaller) + (#equal + 1) / 2
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) less += 1;
      if (x[j] == x[i]) equal += 1;
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

inline double spearman(const std::vector<double>& u, const std::vector<double>& v) {
  return pearson(ranks(u), ranks(v));
}

inline Rows covariance(const Rows& x) {
  const std::size_t n = x.size(), d = x[0].size();
  std::vector<double> mean(d, 0.0);
  for (const auto& row : x)
    for (std::size_t c = 0; c < d; ++c) mean[c] += row[c] / static_cast<double>(n);
  Rows cov(d, std::vector<double>(d, 0.0));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      double s = 0;
      for (const auto& row : x) s += (row[a] - mean[a]) * (row[b] - mean[b]);
      cov[a][b] = s / static_cast<double>(n - 1);
    }
  return cov;
}

inline Rows inverse(Rows a) {
  const std::size_t d = a.size();
  Rows inv(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double p = a[col][col];
    for (std::size_t c = 0; c < d; ++c) {
      a[col][c] /= p;
      inv[col][c] /= p;
    }
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < d; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

inline Rows class_means_per_sample(const Rows& x, const std::vector<std::uint32_t>& y) {
  std::map<std::uint32_t, std::pair<std::vector<double>, double>> acc;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto& [sum, count] = acc[y[i]];
    if (sum.empty()) sum.assign(x[i].size(), 0.0);
    for (std::size_t c = 0; c < x[i].size(); ++c) sum[c] += x[i][c];
    count += 1;
  }
  Rows out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& [sum, count] = acc[y[i]];
    std::vector<double> m(sum.size());
    for (std::size_t c = 0; c < sum.size(); ++c) m[c] = sum[c] / count;
    out.push_back(m);
  }
  return out;
}

// tr(inv(S_f) S_b) with the literal n-row class-mean matrix and an exact inverse.
inline double hscore(const Rows& x, const std::vector<std::uint32_t>& y) {
  const Rows sf = covariance(x);
  const Rows sb = covariance(class_means_per_sample(x, y));
  const Rows inv = inverse(sf);
  double tr = 0;
  for (std::size_t i = 0; i < sf.size(); ++i)
    for (std::size_t k = 0; k < sf.size(); ++k) tr += inv[i][k] * sb[k][i];
  return tr;
}

inline double parc(const Rows& x, const std::vector<std::uint32_t>& y, std::uint32_t classes) {
  std::vector<double> fs, ls;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      fs.push_back(1.0 - pearson(x[i], x[j]));
      // Two distinct one-hot vectors in C dimensions correlate at -1/(C-1).
      ls.push_back(y[i] == y[j] ? 0.0 : 1.0 + 1.0 / (classes - 1.0));
    }
  }
  return spearman(fs, ls);
}

// Exhaustive kNN: sort every train row by (distance, index), vote among the
// first k; vote ties -> smaller summed distance -> smaller class.
inline std::vector<std::uint32_t> knn(const Rows& train, const std::vector<std::uint32_t>& train_y, const Rows& test,
                                      int k) {
  std::vector<std::uint32_t> out;
  for (const auto& q : test) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < train.size(); ++i) {
      double s = 0;
      for (std::size_t c = 0; c < q.size(); ++c) s += (q[c] - train[i][c]) * (q[c] - train[i][c]);
      all.emplace_back(s, i);
    }
    std::sort(all.begin(), all.end());
    std::map<std::uint32_t, std::pair<int, double>> votes;
    for (int j = 0; j < k; ++j) {
      auto& v = votes[train_y[all[static_cast<std::size_t>(j)].second]];
      v.first += 1;
      v.second += std::sqrt(all[static_cast<std::size_t>(j)].first);
    }
    std::uint32_t best = 0;
    std::pair<int, double> best_v{-1, 0.0};
    for (const auto& [c, v] : votes) {
      if (v.first > best_v.first || (v.first == best_v.first && v.second < best_v.second)) {
        best = c;
        best_v = v;
      }
    }
    out.push_back(best);
  }
  return out;
}

inline double dcg(const std::vector<double>& rel, std::size_t k) {
  double s = 0;
  for (std::size_t i = 1; i <= k; ++i) s += (std::pow(2.0, rel[i - 1]) - 1.0) / (std::log(i + 1.0) / std::log(2.0));
  return s;
}

inline double ndcg(const std::vector<std::string>& order, const std::map<std::string, double>& acc, std::size_t k) {
  std::vector<double> pred, ideal;
  for (const auto& id : order) pred.push_back(acc.at(id));
  ideal = pred;
  std::sort(ideal.rbegin(), ideal.rend());
  return dcg(pred, k) / dcg(ideal, k);
}

inline double rel(const std::vector<std::string>& order, const std::map<std::string, double>& acc, std::size_t k) {
  double lo = 1e300, hi = -1e300, top = -1e300;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double a = acc.at(order[i]);
    lo = std::min(lo, a);
    hi = std::max(hi, a);
    if (i < k) top = std::max(top, a);
  }
  return (top - lo) / (hi - lo);
}

inline Rows random_rows(std::size_t n, std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Rows x(n, std::vector<double>(d));
  for (auto& row : x)
    for (auto& v : row) v = g(rng);
  return x;
}

}  // namespace oracle

// Small conversion and filesystem helpers shared by the test binaries.
namespace testutil {

inline Eigen::MatrixXd to_matrix(const oracle::Rows& x) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(x[0].size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t c = 0; c < x[i].size(); ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = x[i][c];
  return m;
}

inline oracle::Rows to_rows(const Eigen::MatrixXd& m) {
  oracle::Rows x(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) x[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = m(i, c);
  return x;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pcmsel_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
