#pragma once

// Ranking quality against fine-tuned ground truth: NDCG@k and min-normalized
// Rel@k.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcmsel/error.hpp"
#include "pcmsel/selection.hpp"
#include "pcmsel/zoo_data.hpp"

namespace pcmsel {

// sum_{i=1..k} (2^r_i - 1) / log2(i + 1)
inline double dcg_at_k(std::span<const double> relevances, std::size_t k) {
  if (k < 1 || k > relevances.size()) {
    throw UsageError("k=" + std::to_string(k) + " outside [1, " + std::to_string(relevances.size()) + "]");
  }
  double dcg = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = relevances[i];
    if (!(r >= 0.0 && r <= 1.0)) throw DataError("relevance " + std::to_string(r) + " outside [0,1]");
    dcg += (std::exp2(r) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

namespace detail {

inline std::vector<double> accuracies_in_rank_order(const RankedList& predicted, const GroundTruthTable& truth) {
  std::vector<double> acc;
  acc.reserve(predicted.entries.size());
  for (const auto& e : predicted.entries) acc.push_back(truth.accuracy(e.model_id));
  return acc;
}

inline void check_k(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) throw UsageError("k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
}

}  // namespace detail

// Relevance of rank i is the fine-tuned accuracy of the model placed there.
// The ideal ordering sorts the ranked models by accuracy.
inline double ndcg_at_k(const RankedList& predicted, const GroundTruthTable& truth, std::size_t k) {
  detail::check_k(k, predicted.entries.size());
  const auto rel = detail::accuracies_in_rank_order(predicted, truth);
  auto ideal = rel;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double denom = dcg_at_k(ideal, k);
  if (!(denom > 0.0)) throw NumericalError("NDCG@" + std::to_string(k) + " undefined: ideal DCG is zero");
  return dcg_at_k(rel, k) / denom;
}

// (best accuracy in top k - worst accuracy) / (best accuracy - worst accuracy),
// extremes taken over the ranked models.
inline double rel_at_k(const RankedList& predicted, const GroundTruthTable& truth, std::size_t k) {
  detail::check_k(k, predicted.entries.size());
  const auto acc = detail::accuracies_in_rank_order(predicted, truth);
  const double lo = *std::min_element(acc.begin(), acc.end());
  const double hi = *std::max_element(acc.begin(), acc.end());
  if (!(hi > lo)) throw DataError("Rel@k undefined: all ranked models have equal accuracy");
  const double best_selected = *std::max_element(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(k));
  return (best_selected - lo) / (hi - lo);
}

struct EvaluationResult {
  std::string method_id;
  std::vector<std::size_t> k_values;
  std::map<std::size_t, double> ndcg_at;
  std::map<std::size_t, double> rel_at;
};

inline EvaluationResult evaluate_ranking(const RankedList& ranking, const GroundTruthTable& truth,
                                         const std::vector<std::size_t>& k_values) {
  EvaluationResult r;
  r.method_id = ranking.method_id;
  r.k_values = k_values;
  for (const auto k : k_values) {
    r.ndcg_at[k] = ndcg_at_k(ranking, truth, k);
    r.rel_at[k] = rel_at_k(ranking, truth, k);
  }
  return r;
}

// One result per method, in the run's method order.
inline std::vector<EvaluationResult> evaluate_selection(const SelectionRun& run, const GroundTruthTable& truth,
                                                        const std::vector<std::size_t>& k_values) {
  if (k_values.empty()) throw UsageError("no k values given");
  std::vector<EvaluationResult> out;
  for (const auto& id : run.methods) {
    const RankedList& ranking = run.result(id).ranking;
    for (const auto& e : ranking.entries) {
      if (!truth.entries.contains(e.model_id)) {
        throw DataError("ground truth has no entry for model '" + e.model_id + "'");
      }
    }
    auto r = evaluate_ranking(ranking, truth, k_values);
    r.method_id = id;
    out.push_back(std::move(r));
  }
  return out;
}

struct MethodGroup {
  std::string name;
  std::vector<std::string> members;
};

inline const std::vector<MethodGroup>& method_groups() {
  static const std::vector<MethodGroup> groups = {
      {"Proxy-based", {"knn1", "knn3", "knn5", "linear", "svm"}},
      {"Distribution-based", {"parc", "hscore"}},
  };
  return groups;
}

// Group rows "<group> (mean)" and "<group> (best)" over the members present.
inline std::vector<EvaluationResult> group_aggregates(const std::vector<EvaluationResult>& results) {
  std::vector<EvaluationResult> out;
  for (const auto& g : method_groups()) {
    std::vector<const EvaluationResult*> members;
    for (const auto& r : results) {
      if (std::find(g.members.begin(), g.members.end(), r.method_id) != g.members.end()) members.push_back(&r);
    }
    if (members.empty()) continue;
    EvaluationResult mean{g.name + " (mean)", members.front()->k_values, {}, {}};
    EvaluationResult best{g.name + " (best)", members.front()->k_values, {}, {}};
    for (const auto k : mean.k_values) {
      double sn = 0.0, sr = 0.0, bn = 0.0, br = 0.0;
      for (const auto* m : members) {
        sn += m->ndcg_at.at(k);
        sr += m->rel_at.at(k);
        bn = std::max(bn, m->ndcg_at.at(k));
        br = std::max(br, m->rel_at.at(k));
      }
      mean.ndcg_at[k] = sn / static_cast<double>(members.size());
      mean.rel_at[k] = sr / static_cast<double>(members.size());
      best.ndcg_at[k] = bn;
      best.rel_at[k] = br;
    }
    out.push_back(std::move(mean));
    out.push_back(std::move(best));
  }
  return out;
}

inline nlohmann::ordered_json evaluation_to_json(const std::vector<EvaluationResult>& results) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& r : results) {
    nlohmann::ordered_json ndcg = nlohmann::ordered_json::object();
    nlohmann::ordered_json rel = nlohmann::ordered_json::object();
    for (const auto k : r.k_values) {
      ndcg[std::to_string(k)] = r.ndcg_at.at(k);
      rel[std::to_string(k)] = r.rel_at.at(k);
    }
    out[r.method_id] = {{"ndcg", std::move(ndcg)}, {"rel", std::move(rel)}};
  }
  return out;
}

// Methods as rows; NDCG@k columns then Rel@k columns.
inline std::string format_evaluation_table(const std::vector<EvaluationResult>& results) {
  if (results.empty()) return {};
  const auto& ks = results.front().k_values;
  std::size_t name_width = 6;
  for (const auto& r : results) name_width = std::max(name_width, r.method_id.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(name_width)) << "Method";
  for (const auto k : ks) os << "  " << std::right << std::setw(8) << ("NDCG@" + std::to_string(k));
  os << "  |";
  for (const auto k : ks) os << "  " << std::right << std::setw(7) << ("Rel@" + std::to_string(k));
  os << '\n';
  os << std::string(name_width + ks.size() * 10 + 3 + ks.size() * 9, '-') << '\n';
  os << std::fixed << std::setprecision(4);
  for (const auto& r : results) {
    os << std::left << std::setw(static_cast<int>(name_width)) << r.method_id;
    for (const auto k : ks) os << "  " << std::right << std::setw(8) << r.ndcg_at.at(k);
    os << "  |";
    for (const auto k : ks) os << "  " << std::right << std::setw(7) << r.rel_at.at(k);
    os << '\n';
  }
  return os.str();
}

}  // namespace pcmsel
