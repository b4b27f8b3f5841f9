#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "clickguard/corpus.hpp"
#include "clickguard/ssafb.hpp"
#include "clickguard/util.hpp"

namespace clickguard {

// Epoch-wise feature dumps: the raw data behind t-SNE-style projections.
// One CSV per (epoch, stage), rows in input record order.

enum class DumpStage {
  kContextualRaw,
  kContextualPostMha,
  kStructuralPreRfe,
  kStructuralPostRfe,
};

inline std::string dump_stage_name(DumpStage s) {
  switch (s) {
    case DumpStage::kContextualRaw: return "contextual_raw";
    case DumpStage::kContextualPostMha: return "contextual_post_mha";
    case DumpStage::kStructuralPreRfe: return "structural_pre_rfe";
    case DumpStage::kStructuralPostRfe: return "structural_post_rfe";
  }
  return "unknown";
}

inline DumpStage parse_dump_stage(std::string_view s) {
  for (DumpStage st : {DumpStage::kContextualRaw, DumpStage::kContextualPostMha,
                       DumpStage::kStructuralPreRfe, DumpStage::kStructuralPostRfe})
    if (dump_stage_name(st) == s) return st;
  throw ConfigError("unknown dump stage: " + std::string(s));
}

namespace detail {

inline std::string rows_to_csv(const FeatureMatrix& rows, const std::vector<int>& labels) {
  if (rows.empty()) throw DataError("dump: no rows");
  std::string out = "label";
  for (std::size_t j = 0; j < rows[0].size(); ++j) out += ",dim_" + std::to_string(j);
  out += "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += std::to_string(labels[i]);
    for (double v : rows[i]) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

}  // namespace detail

// CSV body ("label,dim_0,...") for one stage at the model's current state.
inline std::string dump_stage_csv(const ClickGuardModel& model,
                                  const std::vector<HeadlineRecord>& records,
                                  DumpStage stage,
                                  const Lexicons& lex = builtin_lexicons(),
                                  const PrecomputedEmbeddings* embeddings = nullptr) {
  const auto& cfg = model.config;
  const std::vector<int> labels = labels_of(records);

  if (stage == DumpStage::kStructuralPreRfe) {
    FeatureMatrix rows;
    for (const auto& r : records) {
      auto arr = extract_features(r.text, lex).as_array();
      rows.emplace_back(arr.begin(), arr.end());
    }
    return detail::rows_to_csv(rows, labels);
  }
  if (stage == DumpStage::kStructuralPostRfe) {
    if (!cfg.structural_enabled())
      throw ConfigError("structural_post_rfe dump needs a structural pathway");
    FeatureMatrix rows;
    for (const auto& r : records) rows.push_back(scaled_features(model, r.text, lex));
    return detail::rows_to_csv(rows, labels);
  }

  if (!cfg.use_contextual)
    throw ConfigError("contextual dumps need use_contextual");
  if (stage == DumpStage::kContextualPostMha && !cfg.use_mha)
    throw ConfigError("contextual_post_mha dump needs use_mha");

  PreparedDataset data = prepare_dataset(model, records, lex, embeddings);
  FeatureMatrix rows;
  rows.reserve(records.size());
  std::mt19937_64 unused(0);
  for (std::size_t start = 0; start < records.size(); start += 256) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(records.size(), start + 256); ++i)
      idx.push_back(i);
    BatchInputs b = gather_batch(data, cfg, idx);
    Tensor f_c = cfg.encoder_mode == EncoderMode::kHashEmbedding
                     ? encode(b.encoded, cfg.encoder_config(), model.encoder)
                     : b.precomputed;
    if (stage == DumpStage::kContextualPostMha)
      f_c = mha_forward(f_c, b.encoded.mask, model.mha);
    Tensor pooled = global_max_pool(f_c);  // per-record d_model summary
    for (std::size_t i = 0; i < idx.size(); ++i)
      rows.emplace_back(pooled.data() + i * cfg.d_model,
                        pooled.data() + (i + 1) * cfg.d_model);
  }
  return detail::rows_to_csv(rows, labels);
}

// Writes dump_e{epoch}_{stage}.csv per requested stage; returns the paths.
inline std::vector<std::filesystem::path> dump_features(
    const ClickGuardModel& model, const std::vector<HeadlineRecord>& records,
    std::size_t epoch, const std::vector<DumpStage>& stages,
    const std::filesystem::path& out_dir, const Lexicons& lex = builtin_lexicons(),
    const PrecomputedEmbeddings* embeddings = nullptr) {
  std::vector<std::filesystem::path> written;
  for (DumpStage stage : stages) {
    auto path = out_dir / ("dump_e" + std::to_string(epoch) + "_" +
                           dump_stage_name(stage) + ".csv");
    write_text_file(path, dump_stage_csv(model, records, stage, lex, embeddings));
    written.push_back(std::move(path));
  }
  return written;
}

}  // namespace clickguard
