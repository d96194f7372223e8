#pragma once

// Data model of a model zoo: manifest, per-model probe features (FMX files),
// ground-truth accuracy tables, probe sampling and train/test splitting.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pcmsel/error.hpp"
#include "pcmsel/random.hpp"

namespace pcmsel {

using Label = std::uint32_t;
using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexList = std::vector<std::size_t>;

struct ModelRecord {
  std::string model_id;
  std::string display_name;
  std::int64_t param_count = 0;
  // 0 means unknown; such models are excluded from the dataset-size baseline.
  std::int64_t pretrain_dataset_size = 0;
  std::string feature_path;
  std::vector<std::string> tags;

  bool operator==(const ModelRecord&) const = default;
};

struct ZooManifest {
  int version = 1;
  std::string task_id;
  // Canonical order; every downstream tie-break falls back to it.
  std::vector<ModelRecord> models;
  std::uint32_t label_count = 0;
  std::string metadata_unit;

  std::size_t size() const { return models.size(); }

  std::optional<std::size_t> index_of(std::string_view model_id) const {
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (models[i].model_id == model_id) return i;
    }
    return std::nullopt;
  }

  // First `count` models, metadata otherwise unchanged.
  ZooManifest prefix(std::size_t count) const {
    if (count == 0 || count > models.size()) {
      throw UsageError("zoo prefix size " + std::to_string(count) + " outside [1, " +
                       std::to_string(models.size()) + "]");
    }
    ZooManifest out = *this;
    out.models.resize(count);
    return out;
  }

  bool operator==(const ZooManifest&) const = default;
};

struct ProbeDataset {
  std::string model_id;
  FeatureMatrix features;  // n_samples x d
  std::vector<Label> labels;
  std::uint32_t label_count = 0;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

  std::size_t distinct_labels() const {
    return std::set<Label>(labels.begin(), labels.end()).size();
  }
};

struct GroundTruthTable {
  std::string task_id;
  std::map<std::string, double> entries;  // model_id -> fine-tuned accuracy

  double accuracy(const std::string& model_id) const {
    const auto it = entries.find(model_id);
    if (it == entries.end()) {
      throw DataError("ground truth has no entry for model '" + model_id + "'");
    }
    return it->second;
  }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline void validate_manifest(const ZooManifest& manifest) {
  if (manifest.version != 1) {
    throw DataError("manifest: unsupported version " + std::to_string(manifest.version));
  }
  if (manifest.models.empty()) throw DataError("manifest: 'models' must not be empty");
  if (manifest.label_count < 2) {
    throw DataError("manifest: 'label_count' must be >= 2, got " +
                    std::to_string(manifest.label_count));
  }
  std::set<std::string> seen;
  for (const auto& m : manifest.models) {
    if (m.model_id.empty()) throw DataError("manifest: empty 'model_id'");
    if (!seen.insert(m.model_id).second) {
      throw DataError("manifest: duplicate 'model_id' '" + m.model_id + "'");
    }
    if (m.param_count <= 0) {
      throw DataError("manifest: model '" + m.model_id + "' has 'param_count' <= 0");
    }
    if (m.pretrain_dataset_size < 0) {
      throw DataError("manifest: model '" + m.model_id + "' has negative 'pretrain_dataset_size'");
    }
  }
}

inline void validate_dataset(const ProbeDataset& ds) {
  if (ds.labels.size() != ds.rows()) {
    throw DataError("dataset '" + ds.model_id + "': " + std::to_string(ds.rows()) +
                    " feature rows but " + std::to_string(ds.labels.size()) + " labels");
  }
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
      if (!std::isfinite(ds.features(r, c))) {
        throw DataError("dataset '" + ds.model_id + "': non-finite feature at row " +
                        std::to_string(r) + ", column " + std::to_string(c));
      }
    }
  }
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.labels[i] >= ds.label_count) {
      throw DataError("dataset '" + ds.model_id + "': label " + std::to_string(ds.labels[i]) +
                      " at row " + std::to_string(i) + " not below label_count " +
                      std::to_string(ds.label_count));
    }
  }
}

// Scorers need at least two classes in the probe.
inline void require_two_classes(const ProbeDataset& ds) {
  if (ds.distinct_labels() < 2) {
    throw DataError("dataset '" + ds.model_id + "': fewer than 2 distinct labels");
  }
}

inline void validate_truth(const GroundTruthTable& truth) {
  if (truth.entries.size() < 2) throw DataError("ground truth: needs at least 2 entries");
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& [id, acc] : truth.entries) {
    if (!(acc >= 0.0 && acc <= 1.0)) {
      throw DataError("ground truth: accuracy for '" + id + "' outside [0,1] (" +
                      std::to_string(acc) + "); fractions expected, not percentages");
    }
    lo = std::min(lo, acc);
    hi = std::max(hi, acc);
  }
  if (!(hi > lo)) throw DataError("ground truth: all accuracies are equal");
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

// Writes to a sibling temp file, then renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename onto '" + path.string() + "': " + ec.message());
}

// ---------------------------------------------------------------------------
// Manifest JSON
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
T json_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw DataError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(where + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> known,
                                const std::string& where) {
  for (const auto& item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw DataError(where + ": unknown field '" + item.key() + "'");
    }
  }
}

}  // namespace detail

inline ZooManifest manifest_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DataError("manifest: top level must be an object");
  detail::reject_unknown_keys(doc, {"version", "task_id", "label_count", "metadata_unit", "models"},
                              "manifest");
  ZooManifest m;
  m.version = detail::json_field<int>(doc, "version", "manifest");
  m.task_id = detail::json_field<std::string>(doc, "task_id", "manifest");
  const auto label_count = detail::json_field<std::int64_t>(doc, "label_count", "manifest");
  if (label_count < 2 || label_count > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("manifest: 'label_count' must be >= 2, got " + std::to_string(label_count));
  }
  m.label_count = static_cast<std::uint32_t>(label_count);
  m.metadata_unit = detail::json_field<std::string>(doc, "metadata_unit", "manifest");
  if (!doc.contains("models") || !doc["models"].is_array()) {
    throw DataError("manifest: field 'models' must be an array");
  }
  std::size_t index = 0;
  for (const auto& entry : doc["models"]) {
    const std::string where = "manifest: models[" + std::to_string(index++) + "]";
    if (!entry.is_object()) throw DataError(where + " must be an object");
    detail::reject_unknown_keys(entry,
                                {"model_id", "display_name", "param_count", "pretrain_dataset_size",
                                 "feature_path", "tags"},
                                where);
    ModelRecord r;
    r.model_id = detail::json_field<std::string>(entry, "model_id", where);
    r.display_name = detail::json_field<std::string>(entry, "display_name", where);
    r.param_count = detail::json_field<std::int64_t>(entry, "param_count", where);
    r.pretrain_dataset_size = detail::json_field<std::int64_t>(entry, "pretrain_dataset_size", where);
    r.feature_path = detail::json_field<std::string>(entry, "feature_path", where);
    if (entry.contains("tags")) r.tags = detail::json_field<std::vector<std::string>>(entry, "tags", where);
    m.models.push_back(std::move(r));
  }
  validate_manifest(m);
  return m;
}

inline nlohmann::json manifest_to_json(const ZooManifest& m) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& r : m.models) {
    models.push_back({{"model_id", r.model_id},
                      {"display_name", r.display_name},
                      {"param_count", r.param_count},
                      {"pretrain_dataset_size", r.pretrain_dataset_size},
                      {"feature_path", r.feature_path},
                      {"tags", r.tags}});
  }
  return {{"version", m.version},
          {"task_id", m.task_id},
          {"label_count", m.label_count},
          {"metadata_unit", m.metadata_unit},
          {"models", std::move(models)}};
}

inline ZooManifest load_manifest(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("manifest '" + path.string() + "': " + e.what());
  }
  return manifest_from_json(doc);
}

inline void save_manifest(const ZooManifest& m, const std::filesystem::path& path) {
  validate_manifest(m);
  write_file_atomic(path, manifest_to_json(m).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Ground truth JSON
//
// Written as {"task_id": ..., "accuracies": {model_id: acc}}. A flat object
// whose non-"task_id" keys are model ids is accepted on input as well.
// ---------------------------------------------------------------------------

inline GroundTruthTable truth_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw DataError("ground truth: top level must be an object");
  GroundTruthTable t;
  t.task_id = detail::json_field<std::string>(doc, "task_id", "ground truth");
  const bool nested = doc.contains("accuracies");
  const nlohmann::json& table = nested ? doc["accuracies"] : doc;
  if (!table.is_object()) throw DataError("ground truth: 'accuracies' must be an object");
  for (const auto& item : table.items()) {
    if (!nested && item.key() == "task_id") continue;
    if (!item.value().is_number()) {
      throw DataError("ground truth: accuracy for '" + item.key() + "' is not a number");
    }
    t.entries[item.key()] = item.value().get<double>();
  }
  validate_truth(t);
  return t;
}

inline nlohmann::json truth_to_json(const GroundTruthTable& t) {
  nlohmann::json acc = nlohmann::json::object();
  for (const auto& [id, a] : t.entries) acc[id] = a;
  return {{"task_id", t.task_id}, {"accuracies", std::move(acc)}};
}

inline GroundTruthTable load_truth(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("ground truth '" + path.string() + "': " + e.what());
  }
  return truth_from_json(doc);
}

inline void save_truth(const GroundTruthTable& t, const std::filesystem::path& path) {
  validate_truth(t);
  write_file_atomic(path, truth_to_json(t).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// FMX binary feature files
//
//   "FMX1" | u32 version=1 | u64 n | u64 d | u64 C |
//   n*d f32 row-major | n u32 labels          (all little-endian, unpadded)
// ---------------------------------------------------------------------------

inline constexpr std::string_view kFmxMagic = "FMX1";
inline constexpr std::uint32_t kFmxVersion = 1;
inline constexpr std::size_t kFmxHeaderBytes = 4 + 4 + 8 + 8 + 8;

struct FmxHeader {
  std::uint64_t n_samples = 0;
  std::uint64_t dim = 0;
  std::uint64_t label_count = 0;
};

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
  static_assert(std::is_unsigned_v<T>);
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return value;
}

}  // namespace detail

inline FmxHeader decode_fmx_header(std::string_view bytes, const std::string& where) {
  if (bytes.size() < kFmxHeaderBytes) throw DataError(where + ": truncated FMX header");
  if (bytes.substr(0, 4) != kFmxMagic) throw DataError(where + ": bad magic, not an FMX file");
  const auto version = detail::get_le<std::uint32_t>(bytes, 4);
  if (version != kFmxVersion) {
    throw DataError(where + ": unsupported FMX version " + std::to_string(version));
  }
  FmxHeader h;
  h.n_samples = detail::get_le<std::uint64_t>(bytes, 8);
  h.dim = detail::get_le<std::uint64_t>(bytes, 16);
  h.label_count = detail::get_le<std::uint64_t>(bytes, 24);
  return h;
}

inline std::string encode_fmx(const ProbeDataset& ds) {
  if (ds.rows() == 0) throw DataError("dataset '" + ds.model_id + "': refusing to write n=0 features");
  if (ds.dim() == 0) throw DataError("dataset '" + ds.model_id + "': refusing to write d=0 features");
  validate_dataset(ds);
  std::string out;
  out.reserve(kFmxHeaderBytes + 4 * ds.rows() * (ds.dim() + 1));
  out.append(kFmxMagic);
  detail::put_le<std::uint32_t>(out, kFmxVersion);
  detail::put_le<std::uint64_t>(out, ds.rows());
  detail::put_le<std::uint64_t>(out, ds.dim());
  detail::put_le<std::uint64_t>(out, ds.label_count);
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
      detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(ds.features(r, c)));
    }
  }
  for (const Label y : ds.labels) detail::put_le<std::uint32_t>(out, y);
  return out;
}

inline ProbeDataset decode_fmx(std::string_view bytes, std::string model_id, const std::string& where) {
  const FmxHeader h = decode_fmx_header(bytes, where);
  if (h.n_samples == 0 || h.dim == 0) throw DataError(where + ": empty feature matrix");
  const std::uint64_t payload = bytes.size() - kFmxHeaderBytes;
  // Overflow-safe check of payload == 4 * n * (d + 1).
  if (h.dim + 1 > payload / 4 / h.n_samples || payload != 4 * h.n_samples * (h.dim + 1)) {
    throw DataError(where + ": dimension mismatch, header declares n=" + std::to_string(h.n_samples) +
                    " d=" + std::to_string(h.dim) + " but payload holds " + std::to_string(payload) +
                    " bytes (expected " + std::to_string(4 * h.n_samples * (h.dim + 1)) + ")");
  }
  if (h.label_count > std::numeric_limits<std::uint32_t>::max()) {
    throw DataError(where + ": label_count out of range");
  }
  ProbeDataset ds;
  ds.model_id = std::move(model_id);
  ds.label_count = static_cast<std::uint32_t>(h.label_count);
  ds.features.resize(static_cast<Eigen::Index>(h.n_samples), static_cast<Eigen::Index>(h.dim));
  std::size_t offset = kFmxHeaderBytes;
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.features.cols(); ++c, offset += 4) {
      ds.features(r, c) = std::bit_cast<float>(detail::get_le<std::uint32_t>(bytes, offset));
    }
  }
  ds.labels.resize(h.n_samples);
  for (auto& y : ds.labels) {
    y = detail::get_le<std::uint32_t>(bytes, offset);
    offset += 4;
  }
  try {
    validate_dataset(ds);
  } catch (const DataError& e) {
    throw DataError(where + ": " + e.what());
  }
  return ds;
}

inline FmxHeader read_fmx_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string buf(kFmxHeaderBytes, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  buf.resize(static_cast<std::size_t>(in.gcount()));
  return decode_fmx_header(buf, path.string());
}

// Label block of an FMX file without reading the feature payload.
inline std::vector<Label> read_fmx_labels(const std::filesystem::path& path) {
  const FmxHeader h = read_fmx_header(path);
  const auto expected = kFmxHeaderBytes + 4 * h.n_samples * (h.dim + 1);
  std::error_code ec;
  const auto actual = std::filesystem::file_size(path, ec);
  if (ec || actual != expected) {
    throw DataError(path.string() + ": dimension mismatch between header and payload");
  }
  std::ifstream in(path, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(kFmxHeaderBytes + 4 * h.n_samples * h.dim));
  std::string buf(4 * h.n_samples, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!in) throw DataError(path.string() + ": truncated label block");
  std::vector<Label> labels(h.n_samples);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = detail::get_le<std::uint32_t>(buf, 4 * i);
  return labels;
}

inline void save_features(const ProbeDataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, encode_fmx(ds));
}

inline std::filesystem::path feature_file(const ModelRecord& record, const std::filesystem::path& base_dir) {
  return base_dir / record.feature_path;
}

inline ProbeDataset load_features(const ModelRecord& record, const std::filesystem::path& base_dir) {
  const auto path = feature_file(record, base_dir);
  return decode_fmx(read_file(path), record.model_id, "model '" + record.model_id + "' (" + path.string() + ")");
}

// ---------------------------------------------------------------------------
// Probe sampling and splitting
// ---------------------------------------------------------------------------

inline ProbeDataset take_rows(const ProbeDataset& ds, std::span<const std::size_t> rows) {
  ProbeDataset out;
  out.model_id = ds.model_id;
  out.label_count = ds.label_count;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.features.cols());
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= ds.rows()) throw DataError("row index " + std::to_string(rows[i]) + " out of range");
    out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels[i] = ds.labels[rows[i]];
  }
  return out;
}

inline constexpr int kProbeSampleAttempts = 10;

// Uniform sample of `size` row indices from [0, labels.size()) without
// replacement, sorted ascending. If the sample holds fewer than two classes the
// draw is repeated with seed+1, seed+2, ... up to kProbeSampleAttempts draws.
inline IndexList sample_probe_indices(std::span<const Label> labels, std::size_t size, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (size < 2 || size > n) {
    throw DataError("probe size " + std::to_string(size) + " outside [2, " + std::to_string(n) + "]");
  }
  for (int attempt = 0; attempt < kProbeSampleAttempts; ++attempt) {
    IndexList rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    if (size < n) {
      Rng rng = make_rng({seed + static_cast<std::uint64_t>(attempt)});
      for (std::size_t i = 0; i < size; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(rows[i], rows[pick(rng)]);
      }
      rows.resize(size);
      std::sort(rows.begin(), rows.end());
    }
    const Label first = labels[rows.front()];
    const bool two_classes =
        std::any_of(rows.begin(), rows.end(), [&](std::size_t r) { return labels[r] != first; });
    if (two_classes) return rows;
  }
  throw DataError("probe sample of size " + std::to_string(size) + " has a single class after " +
                  std::to_string(kProbeSampleAttempts) + " attempts starting at seed " + std::to_string(seed));
}

inline ProbeDataset sample_probe(const ProbeDataset& ds, std::size_t size, std::uint64_t seed) {
  const IndexList rows = sample_probe_indices(ds.labels, size, seed);
  return take_rows(ds, rows);
}

struct SplitIndices {
  IndexList train;
  IndexList test;
};

// Per-class proportional split. The total train size is round(f * n); the
// per-class quotas use largest-remainder apportionment (ties to the smaller
// class index) and are clamped so each class lands in both halves.
inline SplitIndices stratified_split_indices(std::span<const Label> labels, double train_fraction,
                                             std::uint64_t seed, std::uint64_t stream = 0) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DataError("train_fraction must lie in (0, 1)");
  }
  std::map<Label, IndexList> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [c, rows] : by_class) {
    if (rows.size() < 2) {
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                      " sample(s); stratified split needs >= 2 per class");
    }
  }

  const auto total_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(labels.size())));
  std::vector<std::pair<Label, std::size_t>> quota;
  std::vector<std::pair<double, Label>> remainder;
  std::size_t assigned = 0;
  for (const auto& [c, rows] : by_class) {
    const double exact = train_fraction * static_cast<double>(rows.size());
    const auto base = static_cast<std::size_t>(std::floor(exact));
    quota.emplace_back(c, base);
    remainder.emplace_back(exact - static_cast<double>(base), c);
    assigned += base;
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < total_train && i < remainder.size(); ++i, ++assigned) {
    for (auto& [c, q] : quota) {
      if (c == remainder[i].second) ++q;
    }
  }

  Rng rng = make_rng({seed, stream});
  SplitIndices out;
  for (auto& [c, q] : quota) {
    IndexList rows = by_class[c];
    std::shuffle(rows.begin(), rows.end(), rng);
    const std::size_t take = std::clamp<std::size_t>(q, 1, rows.size() - 1);
    out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take));
    out.test.insert(out.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(take), rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

inline std::pair<ProbeDataset, ProbeDataset> stratified_split(const ProbeDataset& ds, double train_fraction,
                                                              std::uint64_t seed) {
  const SplitIndices s = stratified_split_indices(ds.labels, train_fraction, seed);
  return {take_rows(ds, s.train), take_rows(ds, s.test)};
}

}  // namespace pcmsel
