#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "clickguard/error.hpp"
#include "clickguard/util.hpp"

#include <json.hpp>

namespace clickguard {

struct HeadlineRecord {
  std::string text;                 // non-empty after trimming
  int label = 0;                    // 0 = non-clickbait, 1 = clickbait
  std::optional<double> raw_score;  // graded score when the source is 4-level
  std::string source;
};

struct DatasetSplit {
  std::vector<HeadlineRecord> train;
  std::vector<HeadlineRecord> test;
  std::uint64_t seed = 0;
  double ratio = 0.8;
};

struct ClassWeights {
  double w0 = 1.0;
  double w1 = 1.0;
};

enum class DatasetFormat { kCsv, kTsv, kJsonl };

inline DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "csv") return DatasetFormat::kCsv;
  if (name == "tsv") return DatasetFormat::kTsv;
  if (name == "jsonl") return DatasetFormat::kJsonl;
  throw ConfigError("unknown dataset format: " + std::string(name));
}

// Graded 4-level score -> binary label: {0.0, 0.33} -> 0, {0.66, 1.0} -> 1.
// Tolerance +-0.005 absorbs float-from-text noise.
inline int binarize_label(double raw_score) {
  static constexpr double kLevels[] = {0.0, 0.33, 0.66, 1.0};
  for (std::size_t i = 0; i < 4; ++i)
    if (std::abs(raw_score - kLevels[i]) <= 0.005) return i < 2 ? 0 : 1;
  throw DataError("invalid graded label: " + format_double(raw_score));
}

struct LoadResult {
  std::vector<HeadlineRecord> records;
  std::size_t dropped_missing = 0;   // rows lacking text or label
  std::size_t skipped_malformed = 0; // rows that failed to parse
};

struct LoadOptions {
  std::string text_column = "headline";
  std::string label_column = "label";
};

namespace detail {

// Accepts binary 0/1 or a graded 4-level score; anything else is malformed.
inline std::optional<std::pair<int, std::optional<double>>> interpret_label(double v) {
  if (std::abs(v - 0.0) <= 0.005) return std::make_pair(0, std::optional<double>{});
  if (std::abs(v - 1.0) <= 0.005) return std::make_pair(1, std::optional<double>{});
  if (std::abs(v - 0.33) <= 0.005 || std::abs(v - 0.66) <= 0.005)
    return std::make_pair(binarize_label(v), std::optional<double>{v});
  return std::nullopt;
}

inline LoadResult load_delimited(const std::filesystem::path& path, char delim,
                                 const LoadOptions& opt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset: " + path.string());

  LoadResult result;
  std::vector<std::string> fields;
  if (!read_csv_record(in, fields, delim))
    throw DataError("empty dataset: " + path.string());

  std::size_t text_idx = fields.size(), label_idx = fields.size();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (trim(fields[i]) == opt.text_column) text_idx = i;
    if (trim(fields[i]) == opt.label_column) label_idx = i;
  }
  if (text_idx == fields.size() || label_idx == fields.size())
    throw DataError("dataset header lacks required columns '" + opt.text_column +
                    "'/'" + opt.label_column + "': " + path.string());

  const std::string source = path.string();
  while (read_csv_record(in, fields, delim)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    if (fields.size() <= std::max(text_idx, label_idx)) {
      ++result.skipped_malformed;
      continue;
    }
    std::string text = trim(fields[text_idx]);
    std::string label_text = trim(fields[label_idx]);
    if (text.empty() || label_text.empty()) {
      ++result.dropped_missing;
      continue;
    }
    auto value = parse_double(label_text);
    if (!value) {
      ++result.skipped_malformed;
      continue;
    }
    auto label = interpret_label(*value);
    if (!label) {
      ++result.skipped_malformed;
      continue;
    }
    result.records.push_back({std::move(text), label->first, label->second, source});
  }
  return result;
}

inline LoadResult load_jsonl(const std::filesystem::path& path, const LoadOptions& opt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset: " + path.string());

  LoadResult result;
  const std::string source = path.string();
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      ++result.skipped_malformed;
      continue;
    }
    std::string text;
    if (obj.contains("text") && obj["text"].is_string())
      text = trim(obj["text"].get<std::string>());
    else if (obj.contains(opt.text_column) && obj[opt.text_column].is_string())
      text = trim(obj[opt.text_column].get<std::string>());

    std::optional<double> raw_score;
    std::optional<int> label;
    if (obj.contains("label") && obj["label"].is_number()) {
      auto interp = interpret_label(obj["label"].get<double>());
      if (interp) {
        label = interp->first;
        raw_score = interp->second;
      }
    } else if (obj.contains("truthMean") && obj["truthMean"].is_number()) {
      double v = obj["truthMean"].get<double>();
      try {
        label = binarize_label(v);
        raw_score = v;
      } catch (const DataError&) {
        ++result.skipped_malformed;
        continue;
      }
    }

    if (text.empty() || !label) {
      ++result.dropped_missing;
      continue;
    }
    result.records.push_back({std::move(text), *label, raw_score, source});
  }
  return result;
}

}  // namespace detail

// Rows with missing text/label are dropped and counted; malformed rows are
// skipped and counted separately. No parseable rows at all is an error.
inline LoadResult load_dataset(const std::filesystem::path& path, DatasetFormat format,
                               const LoadOptions& opt = {}) {
  LoadResult result;
  switch (format) {
    case DatasetFormat::kCsv: result = detail::load_delimited(path, ',', opt); break;
    case DatasetFormat::kTsv: result = detail::load_delimited(path, '\t', opt); break;
    case DatasetFormat::kJsonl: result = detail::load_jsonl(path, opt); break;
  }
  if (result.records.empty()) throw DataError("no parseable rows in " + path.string());
  return result;
}

// w_c = N / (2 * N_c); balanced input gives (1, 1).
inline ClassWeights compute_class_weights(const std::vector<int>& labels) {
  std::size_t n0 = 0, n1 = 0;
  for (int l : labels) (l == 0 ? n0 : n1)++;
  if (n0 == 0 || n1 == 0) throw DataError("class weights need samples of both classes");
  double n = static_cast<double>(labels.size());
  return {n / (2.0 * static_cast<double>(n0)), n / (2.0 * static_cast<double>(n1))};
}

inline std::vector<int> labels_of(const std::vector<HeadlineRecord>& records) {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

// Deterministic stratified split. Per-class train counts: majority class uses
// llround(ratio*N_c), minority class floor(ratio*N_c); ties treat class 0 as
// majority. Records keep file order within each side.
inline DatasetSplit stratified_split(const std::vector<HeadlineRecord>& records,
                                     double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw DataError("split ratio must lie strictly between 0 and 1");

  std::vector<std::size_t> idx0, idx1;
  for (std::size_t i = 0; i < records.size(); ++i)
    (records[i].label == 0 ? idx0 : idx1).push_back(i);
  if (idx0.size() < 2 || idx1.size() < 2)
    throw DataError("stratified split needs at least 2 records per class");

  const bool zero_is_majority = idx0.size() >= idx1.size();
  auto train_count = [&](std::size_t n, bool majority) -> std::size_t {
    double target = ratio * static_cast<double>(n);
    return majority ? static_cast<std::size_t>(std::llround(target))
                    : static_cast<std::size_t>(std::floor(target));
  };

  std::mt19937_64 rng(seed);
  std::vector<bool> in_train(records.size(), false);
  for (int cls = 0; cls < 2; ++cls) {
    auto& idx = cls == 0 ? idx0 : idx1;
    shuffle_deterministic(idx, rng);
    std::size_t take = train_count(idx.size(), (cls == 0) == zero_is_majority);
    for (std::size_t i = 0; i < take; ++i) in_train[idx[i]] = true;
  }

  DatasetSplit split;
  split.seed = seed;
  split.ratio = ratio;
  for (std::size_t i = 0; i < records.size(); ++i)
    (in_train[i] ? split.train : split.test).push_back(records[i]);
  return split;
}

}  // namespace clickguard
