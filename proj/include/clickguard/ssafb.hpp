#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "clickguard/corpus.hpp"
#include "clickguard/feats.hpp"
#include "clickguard/layers.hpp"
#include "clickguard/lexicon.hpp"
#include "clickguard/tensor.hpp"

#include <json.hpp>

namespace clickguard {

// ---------------------------------------------------------------------------
// Adaptive weighting: a learnable two-way convex combination per fusion site.
// fixed_equal is the "without alpha" ablation; it runs the same op sequence
// with zero alphas so the two modes agree bit-for-bit at alphas = (0,0).
// ---------------------------------------------------------------------------

enum class AlphaMode { kLearned, kFixedEqual };

inline std::string alpha_mode_name(AlphaMode m) {
  return m == AlphaMode::kLearned ? "learned_alpha" : "fixed_equal";
}

inline AlphaMode parse_alpha_mode(std::string_view s) {
  if (s == "learned_alpha") return AlphaMode::kLearned;
  if (s == "fixed_equal") return AlphaMode::kFixedEqual;
  throw ConfigError("unknown alpha mode: " + std::string(s));
}

struct AdaptiveWeighting {
  Tensor alphas;  // [2]
  AlphaMode mode = AlphaMode::kLearned;
};

inline Tensor adaptive_weight(const Tensor& a, const Tensor& b,
                              const AdaptiveWeighting& site, Tape* tape = nullptr) {
  if (a.shape() != b.shape())
    throw ShapeError("adaptive_weight: operand shapes differ, " + shape_str(a.shape()) +
                     " vs " + shape_str(b.shape()));
  Tensor alphas = site.mode == AlphaMode::kLearned ? site.alphas : Tensor::zeros({2});
  Tensor w = softmax(alphas, -1, tape);
  Tensor w0 = slice_last(w, 0, 1, tape);
  Tensor w1 = slice_last(w, 1, 1, tape);
  return add(mul(a, w0, tape), mul(b, w1, tape), tape);
}

// ---------------------------------------------------------------------------
// Configuration. Desk-scale defaults; the paper works at d_model=768,
// max_len=64, LSTM sizes 512/256 (pathway 1) and 128/128 (pathway 2).
// ---------------------------------------------------------------------------

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t fusion_dim = 64;
  std::size_t lstm_x1 = 32;
  std::size_t lstm_x2 = 16;
  std::size_t lstm_y1 = 16;
  std::size_t lstm_y2 = 16;
  std::size_t bilstm_hidden = 8;
  std::size_t conv_filters = 8;
  std::size_t conv_window = 3;
  double dropout_rate = 0.4;
  std::size_t mha_heads = 4;
  std::size_t head_dim = 32;  // width of the Z_dense ReLU layer
  std::size_t vocab_buckets = 1 << 15;
  std::size_t max_len = 64;
  EncoderMode encoder_mode = EncoderMode::kHashEmbedding;
  std::size_t rfe_target = 10;
  // ablation flags (Table-2-style configurations)
  bool use_contextual = true;
  bool use_sfg = true;
  bool use_pos = true;
  bool use_mha = true;
  bool use_ssafb = true;
  AlphaMode alpha_mode = AlphaMode::kLearned;

  bool structural_enabled() const { return use_sfg || use_pos; }

  // feature columns eligible for selection under the ablation flags
  std::vector<std::size_t> eligible_feature_indices() const {
    std::vector<std::size_t> idx;
    if (use_pos)
      for (std::size_t i = 0; i < 13; ++i) idx.push_back(i);
    if (use_sfg)
      for (std::size_t i = 13; i < 18; ++i) idx.push_back(i);
    return idx;
  }

  std::size_t selected_count() const {
    return std::min<std::size_t>(rfe_target, eligible_feature_indices().size());
  }

  std::size_t classifier_input() const {
    std::size_t n = 0;
    if (use_contextual) n += fusion_dim;
    if (structural_enabled()) n += fusion_dim;
    return n;
  }

  void validate() const {
    if (!use_contextual && !structural_enabled())
      throw ConfigError("at least one of use_contextual / use_sfg / use_pos must be on");
    if (d_model == 0 || fusion_dim == 0 || max_len == 0)
      throw ConfigError("d_model, fusion_dim and max_len must be positive");
    if (mha_heads == 0 || d_model % mha_heads != 0)
      throw ConfigError("d_model must be divisible by mha_heads");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
      throw ConfigError("dropout_rate must be in [0,1)");
    if (vocab_buckets < 2) throw ConfigError("vocab_buckets must be at least 2");
    if (rfe_target == 0) throw ConfigError("rfe_target must be positive");
    if (structural_enabled() && selected_count() < conv_window)
      throw ConfigError("conv_window exceeds the selected feature count");
    if (lstm_x1 == 0 || lstm_x2 == 0 || lstm_y1 == 0 || lstm_y2 == 0 ||
        bilstm_hidden == 0 || conv_filters == 0 || head_dim == 0)
      throw ConfigError("layer sizes must be positive");
  }

  EncoderConfig encoder_config() const {
    return {vocab_buckets, d_model, max_len, encoder_mode};
  }
};

inline void config_to_json(const ModelConfig& c, nlohmann::json& j) {
  j["d_model"] = c.d_model;
  j["fusion_dim"] = c.fusion_dim;
  j["lstm_x1"] = c.lstm_x1;
  j["lstm_x2"] = c.lstm_x2;
  j["lstm_y1"] = c.lstm_y1;
  j["lstm_y2"] = c.lstm_y2;
  j["bilstm_hidden"] = c.bilstm_hidden;
  j["conv_filters"] = c.conv_filters;
  j["conv_window"] = c.conv_window;
  j["dropout_rate"] = c.dropout_rate;
  j["mha_heads"] = c.mha_heads;
  j["head_dim"] = c.head_dim;
  j["vocab_buckets"] = c.vocab_buckets;
  j["max_len"] = c.max_len;
  j["encoder_mode"] = encoder_mode_name(c.encoder_mode);
  j["rfe_target"] = c.rfe_target;
  j["use_contextual"] = c.use_contextual;
  j["use_sfg"] = c.use_sfg;
  j["use_pos"] = c.use_pos;
  j["use_mha"] = c.use_mha;
  j["use_ssafb"] = c.use_ssafb;
  j["alpha_mode"] = alpha_mode_name(c.alpha_mode);
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d_model = j.at("d_model").get<std::size_t>();
  c.fusion_dim = j.at("fusion_dim").get<std::size_t>();
  c.lstm_x1 = j.at("lstm_x1").get<std::size_t>();
  c.lstm_x2 = j.at("lstm_x2").get<std::size_t>();
  c.lstm_y1 = j.at("lstm_y1").get<std::size_t>();
  c.lstm_y2 = j.at("lstm_y2").get<std::size_t>();
  c.bilstm_hidden = j.at("bilstm_hidden").get<std::size_t>();
  c.conv_filters = j.at("conv_filters").get<std::size_t>();
  c.conv_window = j.at("conv_window").get<std::size_t>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.mha_heads = j.at("mha_heads").get<std::size_t>();
  c.head_dim = j.at("head_dim").get<std::size_t>();
  c.vocab_buckets = j.at("vocab_buckets").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.encoder_mode = parse_encoder_mode(j.at("encoder_mode").get<std::string>());
  c.rfe_target = j.at("rfe_target").get<std::size_t>();
  c.use_contextual = j.at("use_contextual").get<bool>();
  c.use_sfg = j.at("use_sfg").get<bool>();
  c.use_pos = j.at("use_pos").get<bool>();
  c.use_mha = j.at("use_mha").get<bool>();
  c.use_ssafb = j.at("use_ssafb").get<bool>();
  c.alpha_mode = parse_alpha_mode(j.at("alpha_mode").get<std::string>());
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// The model: all learnable state plus the fitted preprocessing artifacts.
// ---------------------------------------------------------------------------

struct ClickGuardModel {
  ModelConfig config;

  // pathway 1 (contextual)
  EncoderParams encoder;
  MhaParams mha;
  LstmParams lstm_x1, lstm_x2;
  DenseParams fdiff_adjust, x1_adjust, x2_adjust;
  AdaptiveWeighting fuse_x1, fuse_x2;

  // pathway 2 (structural)
  Tensor conv_filters;  // [F, window]
  Tensor conv_bias;     // [F]
  LstmParams bilstm_fwd, bilstm_bwd, lstm_y1, lstm_y2;
  DenseParams processed_adjust, ypool_adjust, y2_adjust;
  AdaptiveWeighting fuse_y1, fuse_y2;

  // classification block (Eqs. 8-9)
  DenseParams classifier_dense, classifier_head;

  // fitted preprocessing artifacts
  std::optional<ScalerParams> scaler;
  std::optional<RfeSelection> rfe;

  bool fitted() const {
    return !config.structural_enabled() || (scaler.has_value() && rfe.has_value());
  }

  // Stable name -> tensor registry; also fixes initialization draw order.
  std::vector<std::pair<std::string, Tensor*>> named_parameters() {
    std::vector<std::pair<std::string, Tensor*>> out;
    auto dense = [&](const std::string& name, DenseParams& p) {
      out.emplace_back(name + ".weight", &p.weight);
      out.emplace_back(name + ".bias", &p.bias);
    };
    auto lstm = [&](const std::string& name, LstmParams& p) {
      out.emplace_back(name + ".w_input", &p.w_input);
      out.emplace_back(name + ".w_hidden", &p.w_hidden);
      out.emplace_back(name + ".bias", &p.bias);
    };
    if (config.use_contextual) {
      if (config.encoder_mode == EncoderMode::kHashEmbedding)
        out.emplace_back("encoder.embedding", &encoder.embedding);
      if (config.use_mha) {
        for (std::size_t h = 0; h < config.mha_heads; ++h) {
          std::string prefix = "mha.head" + std::to_string(h);
          out.emplace_back(prefix + ".w_query", &mha.w_query[h]);
          out.emplace_back(prefix + ".w_key", &mha.w_key[h]);
          out.emplace_back(prefix + ".w_value", &mha.w_value[h]);
        }
        out.emplace_back("mha.w_out", &mha.w_out);
        out.emplace_back("mha.ln_gain", &mha.ln_gain);
        out.emplace_back("mha.ln_bias", &mha.ln_bias);
      }
      dense("fdiff_adjust", fdiff_adjust);
      if (config.use_ssafb) {
        lstm("lstm_x1", lstm_x1);
        lstm("lstm_x2", lstm_x2);
        dense("x1_adjust", x1_adjust);
        dense("x2_adjust", x2_adjust);
        out.emplace_back("fuse_x1.alphas", &fuse_x1.alphas);
        out.emplace_back("fuse_x2.alphas", &fuse_x2.alphas);
      }
    }
    if (config.structural_enabled()) {
      out.emplace_back("conv.filters", &conv_filters);
      out.emplace_back("conv.bias", &conv_bias);
      lstm("bilstm_fwd", bilstm_fwd);
      lstm("bilstm_bwd", bilstm_bwd);
      dense("processed_adjust", processed_adjust);
      if (config.use_ssafb) {
        lstm("lstm_y1", lstm_y1);
        lstm("lstm_y2", lstm_y2);
        dense("ypool_adjust", ypool_adjust);
        dense("y2_adjust", y2_adjust);
        out.emplace_back("fuse_y1.alphas", &fuse_y1.alphas);
        out.emplace_back("fuse_y2.alphas", &fuse_y2.alphas);
      }
    }
    dense("classifier_dense", classifier_dense);
    dense("classifier_head", classifier_head);
    return out;
  }
};

inline ClickGuardModel make_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ClickGuardModel m;
  m.config = config;
  std::mt19937_64 rng(seed);
  auto alphas = [] {
    AdaptiveWeighting w;
    w.alphas = Tensor::zeros({2}, /*requires_grad=*/true);
    return w;
  };

  if (config.use_contextual) {
    if (config.encoder_mode == EncoderMode::kHashEmbedding)
      m.encoder = make_encoder(config.encoder_config(), rng);
    if (config.use_mha) m.mha = make_mha(config.d_model, config.mha_heads, rng);
    m.fdiff_adjust = make_dense(config.d_model, config.fusion_dim, rng);
    if (config.use_ssafb) {
      m.lstm_x1 = make_lstm(config.d_model, config.lstm_x1, rng);
      m.lstm_x2 = make_lstm(config.lstm_x1, config.lstm_x2, rng);
      m.x1_adjust = make_dense(config.lstm_x1, config.fusion_dim, rng);
      m.x2_adjust = make_dense(config.lstm_x2, config.fusion_dim, rng);
      m.fuse_x1 = alphas();
      m.fuse_x2 = alphas();
      m.fuse_x1.mode = m.fuse_x2.mode = config.alpha_mode;
    }
  }
  if (config.structural_enabled()) {
    m.conv_filters = glorot_uniform({config.conv_filters, config.conv_window},
                                    config.conv_window, config.conv_filters, rng);
    m.conv_bias = Tensor::zeros({config.conv_filters}, /*requires_grad=*/true);
    m.bilstm_fwd = make_lstm(config.conv_filters, config.bilstm_hidden, rng);
    m.bilstm_bwd = make_lstm(config.conv_filters, config.bilstm_hidden, rng);
    m.processed_adjust = make_dense(2 * config.bilstm_hidden, config.fusion_dim, rng);
    if (config.use_ssafb) {
      m.lstm_y1 = make_lstm(2 * config.bilstm_hidden, config.lstm_y1, rng);
      m.lstm_y2 = make_lstm(config.lstm_y1, config.lstm_y2, rng);
      m.ypool_adjust = make_dense(config.lstm_y1, config.fusion_dim, rng);
      m.y2_adjust = make_dense(config.lstm_y2, config.fusion_dim, rng);
      m.fuse_y1 = alphas();
      m.fuse_y2 = alphas();
      m.fuse_y1.mode = m.fuse_y2.mode = config.alpha_mode;
    }
  }
  m.classifier_dense = make_dense(config.classifier_input(), config.head_dim, rng);
  m.classifier_head = make_dense(config.head_dim, 1, rng);
  return m;
}

// ---------------------------------------------------------------------------
// Pathway forwards (Algorithm 1) and the classification block
// ---------------------------------------------------------------------------

// F_c -> X_3. F_diff is the pooled, dense-ReLU-adjusted contextual summary.
inline Tensor pathway1_forward(const Tensor& f_c, const ClickGuardModel& m,
                               Tape* tape = nullptr) {
  Tensor fdiff = dense_forward(global_max_pool(f_c, tape), m.fdiff_adjust,
                               Activation::kRelu, tape);
  if (!m.config.use_ssafb) return fdiff;
  Tensor x1 = lstm_forward(f_c, m.lstm_x1, LstmDirection::kForward, tape);
  Tensor x2 = lstm_forward(x1, m.lstm_x2, LstmDirection::kForward, tape);
  Tensor x1_adj = dense_forward(global_max_pool(x1, tape), m.x1_adjust,
                                Activation::kRelu, tape);
  Tensor x2_adj = dense_forward(global_max_pool(x2, tape), m.x2_adjust,
                                Activation::kRelu, tape);
  Tensor x3 = adaptive_weight(fdiff, x1_adj, m.fuse_x1, tape);
  return adaptive_weight(x3, x2_adj, m.fuse_x2, tape);
}

// f_input [B, selected] -> Y_3. processed_features is the pooled conv+BiLSTM
// summary; Y_2 is the final hidden state of the second LSTM, dropped out.
inline Tensor pathway2_forward(const Tensor& f_input, const ClickGuardModel& m,
                               bool training, std::mt19937_64& dropout_rng,
                               Tape* tape = nullptr) {
  if (f_input.rank() != 2 || f_input.dim(1) != m.config.selected_count())
    throw ShapeError("pathway2_forward: expected [B," +
                     std::to_string(m.config.selected_count()) + "] features");
  const std::size_t batch = f_input.dim(0);
  Tensor seq = f_input.reshaped({batch, f_input.dim(1), 1});
  Tensor conv = conv1d_forward(seq, m.conv_filters, m.conv_bias,
                               m.config.conv_window, tape);
  Tensor bi = bilstm_forward(conv, m.bilstm_fwd, m.bilstm_bwd, tape);
  Tensor processed = dense_forward(global_max_pool(bi, tape), m.processed_adjust,
                                   Activation::kRelu, tape);
  if (!m.config.use_ssafb) return processed;
  Tensor y1 = lstm_forward(bi, m.lstm_y1, LstmDirection::kForward, tape);
  Tensor y_pool = global_max_pool(y1, tape);
  Tensor y2_seq = lstm_forward(y1, m.lstm_y2, LstmDirection::kForward, tape);
  Tensor y2 = time_slice(y2_seq, y2_seq.dim(1) - 1, tape);
  y2 = dropout(y2, m.config.dropout_rate, training, dropout_rng, tape);
  Tensor ypool_adj = dense_forward(y_pool, m.ypool_adjust, Activation::kRelu, tape);
  Tensor y2_adj = dense_forward(y2, m.y2_adjust, Activation::kRelu, tape);
  Tensor y3 = adaptive_weight(processed, ypool_adj, m.fuse_y1, tape);
  return adaptive_weight(y3, y2_adj, m.fuse_y2, tape);
}

// Z = [X_3 || Y_3] -> ReLU dense -> sigmoid head; [B,1] probabilities.
inline Tensor classify(const std::optional<Tensor>& x3, const std::optional<Tensor>& y3,
                       const ClickGuardModel& m, Tape* tape = nullptr) {
  Tensor z;
  if (x3 && y3) z = concat_last({*x3, *y3}, tape);
  else if (x3) z = *x3;
  else if (y3) z = *y3;
  else throw ShapeError("classify: no pathway outputs");
  Tensor dense = dense_forward(z, m.classifier_dense, Activation::kRelu, tape);
  return dense_forward(dense, m.classifier_head, Activation::kSigmoid, tape);
}

// ---------------------------------------------------------------------------
// Preprocessing artifacts and batch assembly
// ---------------------------------------------------------------------------

// Fits RFE and the scaler on (train) records. When the eligible column count
// does not exceed the target, the selection is the identity over those
// columns (no elimination rounds).
inline void fit_artifacts(ClickGuardModel& model, const std::vector<HeadlineRecord>& records,
                          const Lexicons& lex = builtin_lexicons(),
                          std::uint64_t seed = 0) {
  if (!model.config.structural_enabled() && !model.config.use_contextual)
    throw ConfigError("model has no enabled pathways");

  auto eligible = model.config.eligible_feature_indices();
  if (eligible.empty()) eligible = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12,
                                    13, 14, 15, 16, 17};
  std::vector<std::string> names;
  for (std::size_t i : eligible) names.push_back(feature_names()[i]);

  FeatureMatrix matrix;
  matrix.reserve(records.size());
  std::vector<int> labels;
  for (const auto& r : records) {
    auto full = extract_features(r.text, lex).as_array();
    std::vector<double> row;
    row.reserve(eligible.size());
    for (std::size_t i : eligible) row.push_back(full[i]);
    matrix.push_back(std::move(row));
    labels.push_back(r.label);
  }

  RfeSelection sel;
  if (eligible.size() > model.config.rfe_target) {
    sel = rfe_select(matrix, labels, names, model.config.rfe_target, seed);
  } else {
    sel.input_names = names;
    sel.kept = names;
    sel.estimator_seed = seed;
  }

  auto kept_idx = sel.kept_indices();
  FeatureMatrix selected(matrix.size(), std::vector<double>(kept_idx.size()));
  for (std::size_t r = 0; r < matrix.size(); ++r)
    for (std::size_t j = 0; j < kept_idx.size(); ++j)
      selected[r][j] = matrix[r][kept_idx[j]];

  model.rfe = std::move(sel);
  model.scaler = fit_scaler(selected);
}

// Selected + scaled feature row for one headline.
inline std::vector<double> scaled_features(const ClickGuardModel& model,
                                           const std::string& text,
                                           const Lexicons& lex = builtin_lexicons()) {
  if (!model.rfe || !model.scaler)
    throw NotFittedError("preprocessing artifacts are not fitted");
  auto full = extract_features(text, lex).as_array();
  const auto& names = feature_names();
  std::vector<double> row;
  for (const auto& kept : model.rfe->kept)
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == kept) row.push_back(full[i]);
  return apply_scaler(row, *model.scaler);
}

// Whole-dataset cache: encoder inputs and scaled features, computed once.
struct PreparedDataset {
  EncodedBatch encoded;            // hash-embedding mode
  Tensor precomputed;              // precomputed-file mode, [N, max_len, d_model]
  FeatureMatrix features;          // N rows of selected+scaled features
  std::vector<int> labels;
  std::size_t count = 0;
};

inline PreparedDataset prepare_dataset(const ClickGuardModel& model,
                                       const std::vector<HeadlineRecord>& records,
                                       const Lexicons& lex = builtin_lexicons(),
                                       const PrecomputedEmbeddings* embeddings = nullptr,
                                       const std::vector<std::size_t>* embedding_keys = nullptr) {
  PreparedDataset out;
  out.count = records.size();
  out.labels = labels_of(records);
  const auto& cfg = model.config;
  if (cfg.use_contextual) {
    if (cfg.encoder_mode == EncoderMode::kHashEmbedding) {
      std::vector<std::vector<std::string>> token_lists;
      token_lists.reserve(records.size());
      for (const auto& r : records) token_lists.push_back(encoder_view(r.text, lex));
      out.encoded = make_encoded_batch(token_lists, cfg.encoder_config());
    } else {
      if (!embeddings)
        throw ConfigError("precomputed_file mode needs an embeddings container");
      std::vector<std::size_t> keys;
      if (embedding_keys) keys = *embedding_keys;
      else
        for (std::size_t i = 0; i < records.size(); ++i) keys.push_back(i);
      out.precomputed = embeddings->rows(keys);
      out.encoded.batch = records.size();
      out.encoded.len = cfg.max_len;
      out.encoded.mask.assign(records.size() * cfg.max_len, 1);
    }
  }
  if (cfg.structural_enabled()) {
    if (!model.fitted()) throw NotFittedError("fit_artifacts before preparing data");
    out.features.reserve(records.size());
    for (const auto& r : records) out.features.push_back(scaled_features(model, r.text, lex));
  }
  return out;
}

// One minibatch worth of constant input tensors.
struct BatchInputs {
  EncodedBatch encoded;
  Tensor precomputed;
  Tensor features;  // [B, selected]
  std::size_t batch = 0;
};

inline BatchInputs gather_batch(const PreparedDataset& data, const ModelConfig& cfg,
                                const std::vector<std::size_t>& indices) {
  BatchInputs b;
  b.batch = indices.size();
  if (cfg.use_contextual) {
    b.encoded.batch = indices.size();
    b.encoded.len = data.encoded.len;
    b.encoded.ids.resize(indices.size() * data.encoded.len);
    b.encoded.mask.resize(indices.size() * data.encoded.len);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const std::size_t src = indices[i] * data.encoded.len;
      if (!data.encoded.ids.empty())
        std::copy_n(data.encoded.ids.begin() + static_cast<std::ptrdiff_t>(src),
                    data.encoded.len, b.encoded.ids.begin() + static_cast<std::ptrdiff_t>(i * data.encoded.len));
      std::copy_n(data.encoded.mask.begin() + static_cast<std::ptrdiff_t>(src),
                  data.encoded.len, b.encoded.mask.begin() + static_cast<std::ptrdiff_t>(i * data.encoded.len));
    }
    if (cfg.encoder_mode == EncoderMode::kPrecomputedFile) {
      const std::size_t stride = cfg.max_len * cfg.d_model;
      b.precomputed = Tensor::zeros({indices.size(), cfg.max_len, cfg.d_model});
      for (std::size_t i = 0; i < indices.size(); ++i)
        std::copy_n(data.precomputed.data() + indices[i] * stride, stride,
                    b.precomputed.data() + i * stride);
    }
  }
  if (cfg.structural_enabled()) {
    const std::size_t width = cfg.selected_count();
    b.features = Tensor::zeros({indices.size(), width});
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const auto& row = data.features[indices[i]];
      std::copy_n(row.data(), width, b.features.data() + i * width);
    }
  }
  return b;
}

// Full forward pass over a prepared batch -> [B,1] probabilities.
inline Tensor forward_batch(const ClickGuardModel& m, const BatchInputs& inputs,
                            bool training, std::mt19937_64& dropout_rng,
                            Tape* tape = nullptr) {
  const auto& cfg = m.config;
  std::optional<Tensor> x3, y3;
  if (cfg.use_contextual) {
    Tensor f_c = cfg.encoder_mode == EncoderMode::kHashEmbedding
                     ? encode(inputs.encoded, cfg.encoder_config(), m.encoder, tape)
                     : inputs.precomputed;
    if (cfg.use_mha) f_c = mha_forward(f_c, inputs.encoded.mask, m.mha, tape);
    x3 = pathway1_forward(f_c, m, tape);
  }
  if (cfg.structural_enabled())
    y3 = pathway2_forward(inputs.features, m, training, dropout_rng, tape);
  return classify(x3, y3, m, tape);
}

// Inference over raw records (batched internally, deterministic).
inline std::vector<double> predict(const ClickGuardModel& model,
                                   const std::vector<HeadlineRecord>& records,
                                   const Lexicons& lex = builtin_lexicons(),
                                   const PrecomputedEmbeddings* embeddings = nullptr,
                                   std::size_t batch_size = 64) {
  PreparedDataset data = prepare_dataset(model, records, lex, embeddings);
  std::vector<double> probs;
  probs.reserve(records.size());
  std::mt19937_64 unused_rng(0);
  for (std::size_t start = 0; start < records.size(); start += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(records.size(), start + batch_size); ++i)
      idx.push_back(i);
    BatchInputs b = gather_batch(data, model.config, idx);
    Tensor p = forward_batch(model, b, /*training=*/false, unused_rng);
    for (std::size_t i = 0; i < idx.size(); ++i) probs.push_back(p.data()[i]);
  }
  return probs;
}

}  // namespace clickguard
