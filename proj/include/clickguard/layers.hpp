#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <unordered_map>
#include <vector>

#include "clickguard/error.hpp"
#include "clickguard/tensor.hpp"
#include "clickguard/util.hpp"

#include <json.hpp>

namespace clickguard {

// ---------------------------------------------------------------------------
// Initialization: Glorot-uniform weights, zero biases, seeded draws
// ---------------------------------------------------------------------------

inline Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                             std::mt19937_64& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
  for (std::size_t i = 0; i < t.size(); ++i)
    t.data()[i] = uniform_range(rng, -limit, limit);
  return t;
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

enum class Activation { kNone, kRelu, kSigmoid };

struct DenseParams {
  Tensor weight;  // [in, out]
  Tensor bias;    // [out]
};

inline DenseParams make_dense(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  return {glorot_uniform({in, out}, in, out, rng),
          Tensor::zeros({out}, /*requires_grad=*/true)};
}

// activation(x @ W + b); x may be [B,in] or [B,L,in].
inline Tensor dense_forward(const Tensor& x, const DenseParams& p, Activation act,
                            Tape* tape = nullptr) {
  Tensor z = add(matmul(x, p.weight, tape), p.bias, tape);
  switch (act) {
    case Activation::kNone: return z;
    case Activation::kRelu: return relu(z, tape);
    case Activation::kSigmoid: return sigmoid(z, tape);
  }
  return z;
}

// ---------------------------------------------------------------------------
// LSTM / BiLSTM
// ---------------------------------------------------------------------------

struct LstmParams {
  Tensor w_input;   // [in, 4H], gate blocks ordered input|forget|cell|output
  Tensor w_hidden;  // [H, 4H]
  Tensor bias;      // [4H]
  std::size_t hidden = 0;
};

inline LstmParams make_lstm(std::size_t in, std::size_t hidden, std::mt19937_64& rng) {
  LstmParams p;
  p.hidden = hidden;
  p.w_input = glorot_uniform({in, 4 * hidden}, in, hidden, rng);
  p.w_hidden = glorot_uniform({hidden, 4 * hidden}, hidden, hidden, rng);
  p.bias = Tensor::zeros({4 * hidden}, /*requires_grad=*/true);
  for (std::size_t i = hidden; i < 2 * hidden; ++i) p.bias.data()[i] = 1.0;  // forget gate
  return p;
}

enum class LstmDirection { kForward, kBackward };

// Standard recurrence, zero initial state, sequence length preserved. The
// backward direction walks the reversed sequence and re-reverses its outputs.
inline Tensor lstm_forward(const Tensor& seq, const LstmParams& p,
                           LstmDirection dir = LstmDirection::kForward,
                           Tape* tape = nullptr) {
  if (seq.rank() != 3) throw ShapeError("lstm_forward expects [B,L,in]");
  const std::size_t batch = seq.dim(0), len = seq.dim(1);
  const std::size_t hidden = p.hidden;
  if (seq.dim(2) != p.w_input.dim(0))
    throw ShapeError("lstm_forward: input width does not match parameters");

  Tensor h = Tensor::zeros({batch, hidden});
  Tensor c = Tensor::zeros({batch, hidden});
  std::vector<Tensor> outputs(len);
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t t = dir == LstmDirection::kForward ? step : len - 1 - step;
    Tensor x_t = time_slice(seq, t, tape);
    Tensor z = add(add(matmul(x_t, p.w_input, tape), matmul(h, p.w_hidden, tape), tape),
                   p.bias, tape);
    Tensor gi = sigmoid(slice_last(z, 0, hidden, tape), tape);
    Tensor gf = sigmoid(slice_last(z, hidden, hidden, tape), tape);
    Tensor gc = tanh_op(slice_last(z, 2 * hidden, hidden, tape), tape);
    Tensor go = sigmoid(slice_last(z, 3 * hidden, hidden, tape), tape);
    c = add(mul(gf, c, tape), mul(gi, gc, tape), tape);
    h = mul(go, tanh_op(c, tape), tape);
    outputs[t] = h;
  }
  return stack_steps(outputs, tape);
}

// Channel-wise [h_fwd ; h_bwd] concatenation.
inline Tensor bilstm_forward(const Tensor& seq, const LstmParams& fwd,
                             const LstmParams& bwd, Tape* tape = nullptr) {
  if (fwd.hidden != bwd.hidden)
    throw ConfigError("bilstm_forward: direction hidden sizes differ");
  Tensor f = lstm_forward(seq, fwd, LstmDirection::kForward, tape);
  Tensor b = lstm_forward(seq, bwd, LstmDirection::kBackward, tape);
  return concat_last({f, b}, tape);
}

// ---------------------------------------------------------------------------
// Multi-head attention with residual + layer norm (per-head projections,
// 1/sqrt(d_k) scaling, additive -1e9 logits on masked key positions)
// ---------------------------------------------------------------------------

struct MhaParams {
  std::vector<Tensor> w_query, w_key, w_value;  // per head, [d_model, d_k]
  Tensor w_out;                                 // [h*d_k, d_model]
  Tensor ln_gain, ln_bias;                      // [d_model]
};

inline MhaParams make_mha(std::size_t d_model, std::size_t heads, std::mt19937_64& rng) {
  if (heads == 0 || d_model % heads != 0)
    throw ConfigError("d_model must be divisible by the head count");
  const std::size_t d_k = d_model / heads;
  MhaParams p;
  for (std::size_t h = 0; h < heads; ++h) {
    p.w_query.push_back(glorot_uniform({d_model, d_k}, d_model, d_k, rng));
    p.w_key.push_back(glorot_uniform({d_model, d_k}, d_model, d_k, rng));
    p.w_value.push_back(glorot_uniform({d_model, d_k}, d_model, d_k, rng));
  }
  p.w_out = glorot_uniform({heads * d_k, d_model}, heads * d_k, d_model, rng);
  p.ln_gain = Tensor::full({d_model}, 1.0, /*requires_grad=*/true);
  p.ln_bias = Tensor::zeros({d_model}, /*requires_grad=*/true);
  return p;
}

// mask: batch*len bytes, 1 = real token, 0 = padding. attention_out, when
// given, receives each head's softmax weights (detached) for inspection.
inline Tensor mha_forward(const Tensor& x, const std::vector<std::uint8_t>& mask,
                          const MhaParams& p, Tape* tape = nullptr,
                          std::vector<Tensor>* attention_out = nullptr) {
  if (x.rank() != 3) throw ShapeError("mha_forward expects [B,L,d_model]");
  const std::size_t batch = x.dim(0), len = x.dim(1), d_model = x.dim(2);
  const std::size_t heads = p.w_query.size();
  if (heads == 0 || d_model % heads != 0)
    throw ConfigError("mha_forward: d_model not divisible by head count");
  if (mask.size() != batch * len) throw ShapeError("mha_forward: mask length mismatch");
  const std::size_t d_k = d_model / heads;

  // additive key mask, shared by every query row
  Tensor add_mask = Tensor::zeros({batch, len, len});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t q = 0; q < len; ++q)
      for (std::size_t k = 0; k < len; ++k)
        add_mask.data()[(b * len + q) * len + k] = mask[b * len + k] ? 0.0 : -1e9;

  std::vector<Tensor> head_outputs;
  head_outputs.reserve(heads);
  const double scaling = 1.0 / std::sqrt(static_cast<double>(d_k));
  for (std::size_t h = 0; h < heads; ++h) {
    Tensor q = matmul(x, p.w_query[h], tape);
    Tensor k = matmul(x, p.w_key[h], tape);
    Tensor v = matmul(x, p.w_value[h], tape);
    Tensor logits = affine(matmul_nt(q, k, tape), scaling, 0.0, tape);
    Tensor att = softmax(add(logits, add_mask, tape), -1, tape);
    if (attention_out) attention_out->push_back(att.detached());
    head_outputs.push_back(matmul(att, v, tape));
  }
  Tensor merged = concat_last(head_outputs, tape);
  Tensor projected = matmul(merged, p.w_out, tape);
  return layer_norm(add(x, projected, tape), p.ln_gain, p.ln_bias, 1e-5, tape);
}

// ---------------------------------------------------------------------------
// 1-D convolution over a sequence: ReLU(W . U[i:i+h-1] + b) per window.
// filters is [F, h*d] (each row a flattened window kernel), bias [F].
// ---------------------------------------------------------------------------

inline Tensor conv1d_forward(const Tensor& u, const Tensor& filters, const Tensor& bias,
                             std::size_t window, Tape* tape = nullptr) {
  if (u.rank() != 3) throw ShapeError("conv1d_forward expects [B,L,d]");
  if (filters.rank() != 2 || filters.dim(1) != window * u.dim(2))
    throw ShapeError("conv1d_forward: filters must be [F, window*d]");
  if (bias.size() != filters.dim(0))
    throw ShapeError("conv1d_forward: bias length must equal filter count");
  Tensor windows = unfold_windows(u, window, tape);       // [B, L-h+1, h*d]
  Tensor maps = matmul_nt(windows, filters, tape);        // [B, L-h+1, F]
  return relu(add(maps, bias, tape), tape);
}

// ---------------------------------------------------------------------------
// Inverted dropout: zero with probability `rate`, scale survivors by
// 1/(1-rate); identity at inference.
// ---------------------------------------------------------------------------

inline Tensor dropout(const Tensor& x, double rate, bool training,
                      std::mt19937_64& rng, Tape* tape = nullptr) {
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0,1)");
  if (!training || rate == 0.0) return x;
  Tensor mask = Tensor::zeros(x.shape());
  const double scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask.data()[i] = uniform_unit(rng) < rate ? 0.0 : scale;
  return mul(x, mask, tape);
}

// ---------------------------------------------------------------------------
// Contextual encoder. hash_embedding mode: FNV-1a token buckets into a
// learned table plus fixed sinusoidal positions. precomputed_file mode: rows
// ingested from an embedding file keyed by record index.
// ---------------------------------------------------------------------------

enum class EncoderMode { kHashEmbedding, kPrecomputedFile };

inline std::string encoder_mode_name(EncoderMode m) {
  return m == EncoderMode::kHashEmbedding ? "hash_embedding" : "precomputed_file";
}

inline EncoderMode parse_encoder_mode(std::string_view s) {
  if (s == "hash_embedding") return EncoderMode::kHashEmbedding;
  if (s == "precomputed_file") return EncoderMode::kPrecomputedFile;
  throw ConfigError("unknown encoder mode: " + std::string(s));
}

struct EncoderConfig {
  std::size_t vocab_buckets = 1 << 15;
  std::size_t d_model = 64;
  std::size_t max_len = 64;
  EncoderMode mode = EncoderMode::kHashEmbedding;
};

inline constexpr std::int32_t kPadId = 0;

// Token ids and attention mask, padded/truncated to max_len (head kept).
struct EncodedBatch {
  std::vector<std::int32_t> ids;
  std::vector<std::uint8_t> mask;
  std::size_t batch = 0;
  std::size_t len = 0;
};

inline std::int32_t token_bucket(std::string_view token, std::size_t vocab_buckets) {
  return 1 + static_cast<std::int32_t>(fnv1a64(token) % (vocab_buckets - 1));
}

inline EncodedBatch make_encoded_batch(
    const std::vector<std::vector<std::string>>& token_lists, const EncoderConfig& cfg) {
  if (cfg.vocab_buckets < 2) throw ConfigError("vocab_buckets must be at least 2");
  EncodedBatch out;
  out.batch = token_lists.size();
  out.len = cfg.max_len;
  out.ids.assign(out.batch * out.len, kPadId);
  out.mask.assign(out.batch * out.len, 0);
  for (std::size_t b = 0; b < token_lists.size(); ++b) {
    const auto& toks = token_lists[b];
    const std::size_t n = std::min(toks.size(), cfg.max_len);
    for (std::size_t t = 0; t < n; ++t) {
      out.ids[b * out.len + t] = token_bucket(toks[t], cfg.vocab_buckets);
      out.mask[b * out.len + t] = 1;
    }
  }
  return out;
}

inline Tensor sinusoidal_positions(std::size_t len, std::size_t d) {
  Tensor pe = Tensor::zeros({len, d});
  for (std::size_t pos = 0; pos < len; ++pos)
    for (std::size_t i = 0; i < d; ++i) {
      double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(d);
      double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
      pe.data()[pos * d + i] = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  return pe;
}

struct EncoderParams {
  Tensor embedding;  // [vocab_buckets, d_model]
};

inline EncoderParams make_encoder(const EncoderConfig& cfg, std::mt19937_64& rng) {
  EncoderParams p;
  p.embedding = glorot_uniform({cfg.vocab_buckets, cfg.d_model}, cfg.d_model,
                               cfg.d_model, rng);
  return p;
}

// hash_embedding path: table rows + fixed positions -> [B, max_len, d_model].
inline Tensor encode(const EncodedBatch& batch, const EncoderConfig& cfg,
                     const EncoderParams& params, Tape* tape = nullptr) {
  if (batch.len != cfg.max_len) throw ShapeError("encode: batch built for another max_len");
  Tensor emb = embed_rows(params.embedding, batch.ids, batch.batch, batch.len, tape);
  return add(emb, sinusoidal_positions(cfg.max_len, cfg.d_model), tape);
}

// Precomputed-embedding container. Binary layout: u32 little-endian header
// length, a JSON header {format_version, count, len, d_model, dtype}, then
// float32 little-endian row-major payload [count, len, d_model]. A CSV form
// ("index,v0,...,v{len*d-1}") is accepted for tiny tests.
class PrecomputedEmbeddings {
 public:
  // expected_len/expected_d are required for CSV (the flat width cannot be
  // split otherwise) and validated against the header for binary files.
  static PrecomputedEmbeddings load(const std::filesystem::path& path,
                                    std::size_t expected_len = 0,
                                    std::size_t expected_d = 0) {
    PrecomputedEmbeddings pe = path.extension() == ".csv"
                                   ? load_csv(path, expected_len, expected_d)
                                   : load_binary(path);
    if (expected_len != 0 && expected_d != 0 &&
        (pe.len_ != expected_len || pe.d_model_ != expected_d))
      throw DataError("precomputed embeddings are " + std::to_string(pe.len_) + "x" +
                      std::to_string(pe.d_model_) + ", model expects " +
                      std::to_string(expected_len) + "x" + std::to_string(expected_d));
    return pe;
  }

  static void write_binary(const std::filesystem::path& path, std::size_t count,
                           std::size_t len, std::size_t d_model,
                           const std::vector<float>& payload) {
    if (payload.size() != count * len * d_model)
      throw ShapeError("precomputed payload size mismatch");
    nlohmann::json header = {{"format_version", 1}, {"count", count}, {"len", len},
                             {"d_model", d_model}, {"dtype", "float32"}};
    std::string head = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    std::uint32_t n = static_cast<std::uint32_t>(head.size());
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
  }

  std::size_t len() const { return len_; }
  std::size_t d_model() const { return d_model_; }

  // [B, len, d_model] constant rows for the given record indices.
  Tensor rows(const std::vector<std::size_t>& record_indices) const {
    Tensor out = Tensor::zeros({record_indices.size(), len_, d_model_});
    const std::size_t stride = len_ * d_model_;
    for (std::size_t b = 0; b < record_indices.size(); ++b) {
      auto it = offsets_.find(record_indices[b]);
      if (it == offsets_.end())
        throw DataError("missing precomputed embedding row for record " +
                        std::to_string(record_indices[b]));
      const float* src = payload_.data() + it->second;
      for (std::size_t i = 0; i < stride; ++i)
        out.data()[b * stride + i] = static_cast<double>(src[i]);
    }
    return out;
  }

 private:
  static PrecomputedEmbeddings load_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::uint32_t head_len = 0;
    in.read(reinterpret_cast<char*>(&head_len), 4);
    if (!in || head_len == 0 || head_len > (1u << 20))
      throw DataError("corrupt precomputed-embedding header");
    std::string head(head_len, '\0');
    in.read(head.data(), head_len);
    nlohmann::json j = nlohmann::json::parse(head, nullptr, false);
    if (j.is_discarded() || j.value("format_version", 0) != 1 ||
        j.value("dtype", "") != "float32")
      throw DataError("unsupported precomputed-embedding header");
    PrecomputedEmbeddings pe;
    std::size_t count = j.at("count").get<std::size_t>();
    pe.len_ = j.at("len").get<std::size_t>();
    pe.d_model_ = j.at("d_model").get<std::size_t>();
    pe.payload_.resize(count * pe.len_ * pe.d_model_);
    in.read(reinterpret_cast<char*>(pe.payload_.data()),
            static_cast<std::streamsize>(pe.payload_.size() * sizeof(float)));
    if (!in) throw DataError("precomputed-embedding payload truncated");
    for (std::size_t i = 0; i < count; ++i) offsets_insert(pe, i, i * pe.len_ * pe.d_model_);
    return pe;
  }

  static PrecomputedEmbeddings load_csv(const std::filesystem::path& path,
                                        std::size_t expected_len, std::size_t expected_d) {
    if (expected_len == 0 || expected_d == 0)
      throw ConfigError("csv embeddings need the expected len/d_model to split rows");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> fields;
    if (!read_csv_record(in, fields) || fields.size() < 2)
      throw DataError("empty precomputed-embedding csv");
    PrecomputedEmbeddings pe;
    const std::size_t width = fields.size() - 1;
    if (width != expected_len * expected_d)
      throw DataError("precomputed csv width " + std::to_string(width) +
                      " != len*d_model");
    pe.len_ = expected_len;
    pe.d_model_ = expected_d;
    while (read_csv_record(in, fields)) {
      if (fields.size() != width + 1) throw DataError("ragged precomputed csv row");
      auto idx = parse_int(fields[0]);
      if (!idx || *idx < 0) throw DataError("bad precomputed csv index");
      offsets_insert(pe, static_cast<std::size_t>(*idx), pe.payload_.size());
      for (std::size_t i = 1; i < fields.size(); ++i) {
        auto v = parse_double(fields[i]);
        if (!v) throw DataError("bad precomputed csv value");
        pe.payload_.push_back(static_cast<float>(*v));
      }
    }
    return pe;
  }

  static void offsets_insert(PrecomputedEmbeddings& pe, std::size_t idx, std::size_t off) {
    pe.offsets_[idx] = off;
  }

  std::size_t len_ = 0, d_model_ = 0;
  std::vector<float> payload_;
  std::unordered_map<std::size_t, std::size_t> offsets_;
};

}  // namespace clickguard
