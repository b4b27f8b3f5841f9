#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "clickguard/corpus.hpp"
#include "clickguard/ssafb.hpp"
#include "clickguard/textprep.hpp"
#include "clickguard/train.hpp"

#include <json.hpp>

namespace clickguard {

// ---------------------------------------------------------------------------
// Text perturbations (Fig. 9's five kinds), seeded and deterministic
// ---------------------------------------------------------------------------

enum class PerturbationKind {
  kShuffleWords,
  kStopwordRemoval,
  kRandomDeletion,
  kTypos,
  kSynonyms,
};

inline const std::vector<PerturbationKind>& all_perturbation_kinds() {
  static const std::vector<PerturbationKind> kinds = {
      PerturbationKind::kShuffleWords, PerturbationKind::kStopwordRemoval,
      PerturbationKind::kRandomDeletion, PerturbationKind::kTypos,
      PerturbationKind::kSynonyms};
  return kinds;
}

inline std::string perturbation_kind_name(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::kShuffleWords: return "shuffle_words";
    case PerturbationKind::kStopwordRemoval: return "stopword_removal";
    case PerturbationKind::kRandomDeletion: return "random_deletion";
    case PerturbationKind::kTypos: return "typos";
    case PerturbationKind::kSynonyms: return "synonyms";
  }
  return "unknown";
}

inline PerturbationKind parse_perturbation_kind(std::string_view s) {
  for (PerturbationKind k : all_perturbation_kinds())
    if (perturbation_kind_name(k) == s) return k;
  throw ConfigError("unknown perturbation kind: " + std::string(s));
}

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::kShuffleWords;
  std::uint64_t seed = 0;
  double deletion_prob = 0.1;
  double typo_prob = 0.1;
  std::size_t max_synonym_swaps = 2;

  void validate() const {
    if (deletion_prob < 0.0 || deletion_prob > 1.0 || typo_prob < 0.0 || typo_prob > 1.0)
      throw ConfigError("perturbation probabilities must lie in [0,1]");
  }
};

namespace detail {

// lookup form for perturbation word matching: lowercase, edge punctuation gone
inline std::string lookup_form(const std::string& word) {
  std::string lower = ascii_lower(word);
  std::size_t b = 0, e = lower.size();
  auto is_edge = [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) && c != '\'';
  };
  while (b < e && is_edge(lower[b])) ++b;
  while (e > b && is_edge(lower[e - 1])) --e;
  return lower.substr(b, e - b);
}

inline std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

inline std::string swap_adjacent_codepoints(const std::string& word, std::mt19937_64& rng) {
  // operate on codepoints so multibyte text is not corrupted
  std::vector<std::pair<std::size_t, std::size_t>> cps;  // byte spans
  std::size_t i = 0;
  while (i < word.size()) {
    std::size_t start = i;
    decode_utf8(word, i);
    cps.emplace_back(start, i);
  }
  if (cps.size() < 2) return word;
  std::size_t pos = uniform_index(rng, cps.size() - 1);
  std::string out;
  for (std::size_t c = 0; c < cps.size(); ++c) {
    std::size_t src = c;
    if (c == pos) src = c + 1;
    else if (c == pos + 1) src = c - 1;
    out += word.substr(cps[src].first, cps[src].second - cps[src].first);
  }
  return out;
}

}  // namespace detail

inline std::string perturb(const std::string& text, const PerturbationSpec& spec,
                           const Lexicons& lex = builtin_lexicons()) {
  spec.validate();
  std::vector<std::string> words = split_whitespace(text);
  if (words.empty()) return text;
  std::mt19937_64 rng(spec.seed);

  switch (spec.kind) {
    case PerturbationKind::kShuffleWords: {
      shuffle_deterministic(words, rng);
      return detail::join_words(words);
    }
    case PerturbationKind::kStopwordRemoval: {
      std::vector<std::string> kept;
      for (const auto& w : words)
        if (!lex.stopwords.count(detail::lookup_form(w))) kept.push_back(w);
      return detail::join_words(kept);
    }
    case PerturbationKind::kRandomDeletion: {
      std::vector<std::string> kept;
      for (const auto& w : words)
        if (uniform_unit(rng) >= spec.deletion_prob) kept.push_back(w);
      if (kept.empty()) kept.push_back(words[uniform_index(rng, words.size())]);
      return detail::join_words(kept);
    }
    case PerturbationKind::kTypos: {
      for (auto& w : words)
        if (uniform_unit(rng) < spec.typo_prob)
          w = detail::swap_adjacent_codepoints(w, rng);
      return detail::join_words(words);
    }
    case PerturbationKind::kSynonyms: {
      std::vector<std::size_t> eligible;
      for (std::size_t i = 0; i < words.size(); ++i)
        if (lex.synonyms.count(detail::lookup_form(words[i]))) eligible.push_back(i);
      shuffle_deterministic(eligible, rng);
      const std::size_t swaps = std::min(spec.max_synonym_swaps, eligible.size());
      for (std::size_t s = 0; s < swaps; ++s) {
        const auto& alts = lex.synonyms.at(detail::lookup_form(words[eligible[s]]));
        words[eligible[s]] = alts[uniform_index(rng, alts.size())];
      }
      return detail::join_words(words);
    }
  }
  return text;
}

// ---------------------------------------------------------------------------
// Model adapter for the trust harness. Binds an evaluation record set so PFI
// and LIME can intervene on the selected structural features while the
// contextual inputs stay fixed. Oracle models in tests implement this too.
// ---------------------------------------------------------------------------

class TrustModel {
 public:
  virtual ~TrustModel() = default;
  virtual const std::vector<HeadlineRecord>& records() const = 0;
  // full pipeline over raw texts (features recomputed from the text)
  virtual std::vector<double> predict_texts(const std::vector<std::string>& texts) const = 0;
  // scaled selected-feature rows of the bound records
  virtual const FeatureMatrix& base_features() const = 0;
  // record_idx selects the fixed contextual side; rows override the features
  virtual std::vector<double> predict_with_features(
      const std::vector<std::size_t>& record_idx, const FeatureMatrix& rows) const = 0;
  virtual std::vector<std::string> feature_names() const = 0;
};

class SsafbTrustModel final : public TrustModel {
 public:
  SsafbTrustModel(const ClickGuardModel& model, std::vector<HeadlineRecord> records,
                  const Lexicons& lex = builtin_lexicons(),
                  const PrecomputedEmbeddings* embeddings = nullptr,
                  const std::vector<std::size_t>* embedding_keys = nullptr)
      : model_(model), lex_(lex), records_(std::move(records)) {
    data_ = prepare_dataset(model_, records_, lex_, embeddings, embedding_keys);
    if (!model_.config.structural_enabled())
      features_.assign(records_.size(), {});  // no structural inputs to explain
    else
      features_ = data_.features;
  }

  const std::vector<HeadlineRecord>& records() const override { return records_; }

  std::vector<double> predict_texts(const std::vector<std::string>& texts) const override {
    if (model_.config.use_contextual &&
        model_.config.encoder_mode == EncoderMode::kPrecomputedFile)
      throw ConfigError(
          "text perturbation needs the hash encoder; precomputed embeddings "
          "cannot be recomputed for perturbed text");
    std::vector<HeadlineRecord> recs;
    recs.reserve(texts.size());
    for (const auto& t : texts) recs.push_back({t.empty() ? " " : t, 0, std::nullopt, "trust"});
    return predict(model_, recs, lex_);
  }

  const FeatureMatrix& base_features() const override { return features_; }

  std::vector<double> predict_with_features(const std::vector<std::size_t>& record_idx,
                                            const FeatureMatrix& rows) const override {
    if (record_idx.size() != rows.size())
      throw ShapeError("predict_with_features: indices and rows misaligned");
    std::vector<double> probs;
    probs.reserve(record_idx.size());
    std::mt19937_64 unused(0);
    const std::size_t width = model_.config.structural_enabled()
                                  ? model_.config.selected_count()
                                  : 0;
    for (std::size_t start = 0; start < record_idx.size(); start += 256) {
      const std::size_t stop = std::min(record_idx.size(), start + 256);
      std::vector<std::size_t> idx(record_idx.begin() + static_cast<std::ptrdiff_t>(start),
                                   record_idx.begin() + static_cast<std::ptrdiff_t>(stop));
      BatchInputs batch = gather_batch(data_, model_.config, idx);
      if (width > 0) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
          if (rows[start + i].size() != width)
            throw ShapeError("feature row width mismatch");
          std::copy_n(rows[start + i].data(), width, batch.features.data() + i * width);
        }
      }
      Tensor p = forward_batch(model_, batch, /*training=*/false, unused);
      for (std::size_t i = 0; i < idx.size(); ++i) probs.push_back(p.data()[i]);
    }
    return probs;
  }

  std::vector<std::string> feature_names() const override {
    if (model_.rfe) return model_.rfe->kept;
    return {};
  }

 private:
  const ClickGuardModel& model_;
  const Lexicons& lex_;
  std::vector<HeadlineRecord> records_;
  PreparedDataset data_;
  FeatureMatrix features_;
};

// ---------------------------------------------------------------------------
// Average Prediction Change: mean |p(perturb(x)) - p(x)| over the bound
// records; record i perturbs with seed (spec.seed XOR i).
// ---------------------------------------------------------------------------

inline double avg_prediction_change(const TrustModel& model, const PerturbationSpec& spec,
                                    const Lexicons& lex = builtin_lexicons()) {
  const auto& recs = model.records();
  if (recs.empty()) throw DataError("avg_prediction_change: no records");
  std::vector<std::string> original, perturbed;
  original.reserve(recs.size());
  perturbed.reserve(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    original.push_back(recs[i].text);
    PerturbationSpec derived = spec;
    derived.seed = spec.seed ^ static_cast<std::uint64_t>(i);
    perturbed.push_back(perturb(recs[i].text, derived, lex));
  }
  auto p0 = model.predict_texts(original);
  auto p1 = model.predict_texts(perturbed);
  double acc = 0.0;
  for (std::size_t i = 0; i < p0.size(); ++i) acc += std::abs(p1[i] - p0[i]);
  return acc / static_cast<double>(p0.size());
}

// ---------------------------------------------------------------------------
// Permutation feature importance
// ---------------------------------------------------------------------------

enum class PfiMetric { kAccuracy, kLoss };

inline std::string pfi_metric_name(PfiMetric m) {
  return m == PfiMetric::kAccuracy ? "accuracy" : "loss";
}

struct PfiResult {
  double importance = 0.0;  // positive = the feature helps
  double std_dev = 0.0;
  double baseline_metric = 0.0;
};

inline PfiResult pfi(const TrustModel& model, const std::vector<int>& labels,
                     std::size_t feature_index, std::size_t repeats, PfiMetric metric,
                     std::uint64_t seed) {
  if (repeats < 1) throw ConfigError("pfi needs at least one repeat");
  const FeatureMatrix& base = model.base_features();
  if (base.empty() || base[0].empty()) throw DataError("pfi: model has no feature inputs");
  if (feature_index >= base[0].size())
    throw DataError("pfi: feature index out of range");
  if (labels.size() != base.size()) throw ShapeError("pfi: labels misaligned");

  std::vector<std::size_t> all_idx(base.size());
  for (std::size_t i = 0; i < all_idx.size(); ++i) all_idx[i] = i;

  auto metric_of = [&](const std::vector<double>& probs) {
    if (metric == PfiMetric::kAccuracy) {
      std::size_t correct = 0;
      for (std::size_t i = 0; i < probs.size(); ++i)
        if (predicted_class(probs[i]) == labels[i]) ++correct;
      return static_cast<double>(correct) / static_cast<double>(probs.size());
    }
    return weighted_bce(probs, labels);
  };

  const double baseline = metric_of(model.predict_with_features(all_idx, base));

  std::mt19937_64 rng(seed);
  std::vector<double> importances;
  importances.reserve(repeats);
  for (std::size_t r = 0; r < repeats; ++r) {
    std::vector<std::size_t> perm = all_idx;
    shuffle_deterministic(perm, rng);
    FeatureMatrix shuffled = base;
    for (std::size_t i = 0; i < base.size(); ++i)
      shuffled[i][feature_index] = base[perm[i]][feature_index];
    const double permuted = metric_of(model.predict_with_features(all_idx, shuffled));
    importances.push_back(metric == PfiMetric::kAccuracy ? baseline - permuted
                                                         : permuted - baseline);
  }

  PfiResult out;
  out.baseline_metric = baseline;
  for (double v : importances) out.importance += v;
  out.importance /= static_cast<double>(importances.size());
  double var = 0.0;
  for (double v : importances) var += (v - out.importance) * (v - out.importance);
  out.std_dev = std::sqrt(var / static_cast<double>(importances.size()));
  return out;
}

// ---------------------------------------------------------------------------
// LIME-style local explanation: Gaussian samples around the instance in
// scaled feature space (contextual side fixed), exponential-kernel weights,
// weighted least-squares linear surrogate, top-k coefficients by magnitude.
// ---------------------------------------------------------------------------

struct LimeEntry {
  std::string feature;
  double weight = 0.0;
};

struct LimeExplanation {
  std::vector<LimeEntry> top;
  double intercept = 0.0;
  double kernel_width = 0.0;
  std::size_t n_samples = 0;
};

namespace detail {

// solves A x = b in place, partial pivoting; A is (n x n) row-major
inline std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b,
                                        std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (std::abs(a[pivot * n + col]) < 1e-12)
      throw DataError("singular system in the LIME surrogate fit");
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri * n + c] * x[c];
    x[ri] = acc / a[ri * n + ri];
  }
  return x;
}

}  // namespace detail

inline LimeExplanation lime_explain(const TrustModel& model, std::size_t record_index,
                                    std::size_t n_samples = 1000,
                                    double kernel_width = 0.0, std::size_t k_top = 5,
                                    std::uint64_t seed = 0) {
  if (n_samples < 50) throw ConfigError("lime needs at least 50 samples");
  const FeatureMatrix& base = model.base_features();
  if (base.empty() || base[0].empty())
    throw NotFittedError("lime: model exposes no fitted feature inputs");
  if (record_index >= base.size()) throw DataError("lime: record index out of range");
  const std::size_t k = base[0].size();
  if (k_top > k) throw ConfigError("lime: k exceeds the feature count");
  if (kernel_width <= 0.0) kernel_width = 0.75 * std::sqrt(static_cast<double>(k));

  const std::vector<double>& x = base[record_index];
  std::mt19937_64 rng(seed);
  FeatureMatrix samples(n_samples, std::vector<double>(k));
  std::vector<double> weights(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    double dist2 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double noise = normal_draw(rng);  // unit std in scaled space
      samples[s][j] = x[j] + noise;
      dist2 += noise * noise;
    }
    weights[s] = std::exp(-dist2 / (kernel_width * kernel_width));
  }

  std::vector<std::size_t> idx(n_samples, record_index);
  std::vector<double> y = model.predict_with_features(idx, samples);

  // weighted normal equations over [1, z]
  const std::size_t dim = k + 1;
  std::vector<double> xtx(dim * dim, 0.0);
  std::vector<double> xty(dim, 0.0);
  std::vector<double> row(dim);
  for (std::size_t s = 0; s < n_samples; ++s) {
    row[0] = 1.0;
    for (std::size_t j = 0; j < k; ++j) row[j + 1] = samples[s][j];
    for (std::size_t a = 0; a < dim; ++a) {
      xty[a] += weights[s] * row[a] * y[s];
      for (std::size_t b = 0; b < dim; ++b) xtx[a * dim + b] += weights[s] * row[a] * row[b];
    }
  }
  for (std::size_t d = 0; d < dim; ++d) xtx[d * dim + d] += 1e-10;  // ridge guard
  std::vector<double> beta = detail::solve_linear(std::move(xtx), std::move(xty), dim);

  std::vector<std::size_t> order(k);
  for (std::size_t j = 0; j < k; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double va = std::abs(beta[a + 1]), vb = std::abs(beta[b + 1]);
    if (va != vb) return va > vb;
    return a < b;
  });

  LimeExplanation out;
  out.intercept = beta[0];
  out.kernel_width = kernel_width;
  out.n_samples = n_samples;
  auto names = model.feature_names();
  for (std::size_t j = 0; j < k_top; ++j) {
    std::string name = order[j] < names.size() ? names[order[j]]
                                               : "f" + std::to_string(order[j]);
    out.top.push_back({name, beta[order[j] + 1]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Radar export: per-class means of min-max-normalized raw Table 1 features
// ---------------------------------------------------------------------------

struct RadarRow {
  std::string feature;
  std::optional<double> class0_mean;
  std::optional<double> class1_mean;
};

inline std::vector<RadarRow> export_radar(const std::vector<HeadlineRecord>& records,
                                          const Lexicons& lex = builtin_lexicons()) {
  if (records.empty()) throw DataError("export_radar: no records");
  std::vector<std::array<double, kFeatureCount>> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(extract_features(r.text, lex).as_array());

  std::array<double, kFeatureCount> lo{}, hi{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    lo[j] = rows[0][j];
    hi[j] = rows[0][j];
  }
  for (const auto& row : rows)
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      lo[j] = std::min(lo[j], row[j]);
      hi[j] = std::max(hi[j], row[j]);
    }

  std::array<double, kFeatureCount> sum0{}, sum1{};
  std::size_t n0 = 0, n1 = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool one = records[i].label == 1;
    (one ? n1 : n0)++;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      const double range = hi[j] - lo[j];
      const double norm = range > 0.0 ? (rows[i][j] - lo[j]) / range : 0.0;
      (one ? sum1[j] : sum0[j]) += norm;
    }
  }

  std::vector<RadarRow> out;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    RadarRow row;
    row.feature = feature_names()[j];
    if (n0 > 0) row.class0_mean = sum0[j] / static_cast<double>(n0);
    if (n1 > 0) row.class1_mean = sum1[j] / static_cast<double>(n1);
    out.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report assembly (JSON document + plot-ready CSV sections)
// ---------------------------------------------------------------------------

struct TrustReport {
  std::vector<std::pair<std::string, double>> perturbation;  // kind -> APC
  struct PfiRow {
    std::string feature;
    double importance = 0.0;
    double std_dev = 0.0;
  };
  std::vector<PfiRow> pfi_rows;
  std::string pfi_metric = "accuracy";
  std::vector<std::pair<std::size_t, LimeExplanation>> lime;  // record id -> top-k
  std::vector<RadarRow> radar;
  PerturbationSpec params;  // recorded perturbation parameters
};

inline std::string perturbation_csv(const TrustReport& r) {
  std::string out = "kind,avg_prediction_change\n";
  for (const auto& [kind, apc] : r.perturbation)
    out += kind + "," + format_double(apc) + "\n";
  return out;
}

inline std::string pfi_csv(const TrustReport& r) {
  std::string out = "feature,importance,std\n";
  for (const auto& row : r.pfi_rows)
    out += row.feature + "," + format_double(row.importance) + "," +
           format_double(row.std_dev) + "\n";
  return out;
}

inline std::string lime_csv(const LimeExplanation& e) {
  std::string out = "feature,weight\n";
  for (const auto& entry : e.top)
    out += entry.feature + "," + format_double(entry.weight) + "\n";
  return out;
}

inline std::string radar_csv(const std::vector<RadarRow>& rows) {
  std::string out = "feature,class0_mean,class1_mean\n";
  for (const auto& row : rows) {
    out += row.feature + ",";
    if (row.class0_mean) out += format_double(*row.class0_mean);
    out += ",";
    if (row.class1_mean) out += format_double(*row.class1_mean);
    out += "\n";
  }
  return out;
}

inline nlohmann::json trust_report_json(const TrustReport& r) {
  nlohmann::json j;
  nlohmann::json pert = nlohmann::json::object();
  for (const auto& [kind, apc] : r.perturbation) pert[kind] = apc;
  j["perturbation"] = pert;
  j["perturbation_params"] = {{"deletion_prob", r.params.deletion_prob},
                              {"typo_prob", r.params.typo_prob},
                              {"max_synonym_swaps", r.params.max_synonym_swaps},
                              {"seed", r.params.seed}};
  nlohmann::json pfi_rows = nlohmann::json::array();
  for (const auto& row : r.pfi_rows)
    pfi_rows.push_back({{"feature", row.feature},
                        {"importance", row.importance},
                        {"std", row.std_dev}});
  j["pfi"] = {{"metric", r.pfi_metric}, {"rows", pfi_rows}};
  nlohmann::json lime = nlohmann::json::array();
  for (const auto& [id, exp] : r.lime) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : exp.top)
      entries.push_back({{"feature", e.feature}, {"weight", e.weight}});
    lime.push_back({{"record", id},
                    {"kernel_width", exp.kernel_width},
                    {"n_samples", exp.n_samples},
                    {"intercept", exp.intercept},
                    {"top", entries}});
  }
  j["lime"] = lime;
  nlohmann::json radar = nlohmann::json::array();
  for (const auto& row : r.radar) {
    nlohmann::json rr;
    rr["feature"] = row.feature;
    rr["class0_mean"] = row.class0_mean ? nlohmann::json(*row.class0_mean) : nlohmann::json();
    rr["class1_mean"] = row.class1_mean ? nlohmann::json(*row.class1_mean) : nlohmann::json();
    radar.push_back(rr);
  }
  j["radar"] = radar;
  return j;
}

}  // namespace clickguard
