#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clickguard/error.hpp"
#include "clickguard/lexicon.hpp"
#include "clickguard/postag.hpp"
#include "clickguard/textprep.hpp"
#include "clickguard/util.hpp"

#include <json.hpp>

namespace clickguard {

inline constexpr std::size_t kFeatureCount = 18;

// Canonical Table 1 order: 13 POS counts then the 5 SFG counts.
inline const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "P_fp", "P_sp", "P_pn", "N",    "V",       "Adj",  "Adv",  "P",    "Prep",
      "Punc", "D",    "St_w", "Sl_w", "n_char",  "n_words", "n_Qm", "n_Em", "n_hash"};
  return names;
}

struct StructuralFeatures {
  // POS counts
  int first_person_pronouns = 0;   // P_fp
  int second_person_pronouns = 0;  // P_sp
  int possessive_pronouns = 0;     // P_pn
  int nouns = 0;                   // N
  int verbs = 0;                   // V
  int adjectives = 0;              // Adj
  int adverbs = 0;                 // Adv
  int pronouns = 0;                // P (all pronoun tags)
  int prepositions = 0;            // Prep
  int punctuation = 0;             // Punc
  int determiners = 0;             // D
  int stop_words = 0;              // St_w
  int slang_words = 0;             // Sl_w
  // SFG counts
  int char_count = 0;              // n_char (normalized text, spaces included)
  int word_count = 0;              // n_words (non-punctuation tokens)
  int question_marks = 0;          // n_Qm
  int exclamation_marks = 0;       // n_Em
  int hashtags = 0;                // n_hash

  std::array<double, kFeatureCount> as_array() const {
    return {static_cast<double>(first_person_pronouns),
            static_cast<double>(second_person_pronouns),
            static_cast<double>(possessive_pronouns),
            static_cast<double>(nouns),
            static_cast<double>(verbs),
            static_cast<double>(adjectives),
            static_cast<double>(adverbs),
            static_cast<double>(pronouns),
            static_cast<double>(prepositions),
            static_cast<double>(punctuation),
            static_cast<double>(determiners),
            static_cast<double>(stop_words),
            static_cast<double>(slang_words),
            static_cast<double>(char_count),
            static_cast<double>(word_count),
            static_cast<double>(question_marks),
            static_cast<double>(exclamation_marks),
            static_cast<double>(hashtags)};
  }
};

// ---------------------------------------------------------------------------
// POS tagging: closed-class lexicons first, then suffix heuristics, NOUN as
// the open-class fallback. Pluggable so a statistical tagger can be swapped
// in without touching the feature pipeline.
// ---------------------------------------------------------------------------

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual std::vector<PosTag> tag(const TokenSeq& tokens) const = 0;
};

class RuleBasedPosTagger final : public PosTagger {
 public:
  explicit RuleBasedPosTagger(const Lexicons& lex = builtin_lexicons()) : lex_(lex) {}

  std::vector<PosTag> tag(const TokenSeq& tokens) const override {
    std::vector<PosTag> tags;
    tags.reserve(tokens.size());
    for (const auto& tok : tokens.tokens) tags.push_back(tag_one(tok));
    return tags;
  }

 private:
  PosTag tag_one(const std::string& tok) const {
    bool has_letter = false, has_digit = false;
    std::size_t i = 0;
    while (i < tok.size()) {
      char32_t cp = detail::decode_utf8(tok, i);
      has_letter |= detail::is_letter_cp(cp);
      has_digit |= detail::is_ascii_digit(cp);
    }
    if (!has_letter) return has_digit ? PosTag::kOther : PosTag::kPunct;

    if (lex_.pron_first.count(tok)) return PosTag::kPronFirst;
    if (lex_.pron_second.count(tok)) return PosTag::kPronSecond;
    if (lex_.pron_possessive.count(tok)) return PosTag::kPronPossessive;
    if (lex_.pron_other.count(tok)) return PosTag::kPronOther;
    if (lex_.determiners.count(tok)) return PosTag::kDet;
    if (lex_.prepositions.count(tok)) return PosTag::kPrep;
    if (lex_.verbs.count(tok)) return PosTag::kVerb;
    if (lex_.adverbs.count(tok)) return PosTag::kAdv;
    if (lex_.adjectives.count(tok)) return PosTag::kAdj;

    using detail::ends_with;
    if (ends_with(tok, "ly") && tok.size() > 3) return PosTag::kAdv;
    if ((ends_with(tok, "ing") || ends_with(tok, "ed")) && tok.size() > 4)
      return PosTag::kVerb;
    for (const char* suf : {"ous", "ful", "ive", "able", "ible", "less", "ish",
                            "est", "ese", "ic", "al"})
      if (ends_with(tok, suf) && tok.size() > std::string_view(suf).size() + 2)
        return PosTag::kAdj;
    return PosTag::kNoun;
  }

  const Lexicons& lex_;
};

inline std::vector<PosTag> pos_tag(const TokenSeq& tokens,
                                   const Lexicons& lex = builtin_lexicons()) {
  return RuleBasedPosTagger(lex).tag(tokens);
}

// ---------------------------------------------------------------------------
// Table 1 counting
// ---------------------------------------------------------------------------

// SFG counts over the FEATURE view. n_char includes spaces; n_words excludes
// standalone punctuation tokens; the mark counts scan the normalized text.
inline void extract_sfg(const NormalizedText& text, const TokenSeq& tokens,
                        StructuralFeatures& out) {
  out.char_count = static_cast<int>(text.codepoint_count());
  out.question_marks = 0;
  out.exclamation_marks = 0;
  out.hashtags = 0;
  for (char c : text.value) {
    if (c == '?') ++out.question_marks;
    if (c == '!') ++out.exclamation_marks;
    if (c == '#') ++out.hashtags;
  }
  int words = 0;
  for (const auto& tok : tokens.tokens) {
    bool word_like = false;
    std::size_t i = 0;
    while (i < tok.size())
      word_like |= detail::is_word_cp(detail::decode_utf8(tok, i));
    if (word_like) ++words;
  }
  out.word_count = words;
}

inline void extract_pos_counts(const std::vector<PosTag>& tags, const TokenSeq& tokens,
                               StructuralFeatures& out,
                               const Lexicons& lex = builtin_lexicons()) {
  if (tags.size() != tokens.size())
    throw ShapeError("POS tags and tokens are misaligned");
  for (std::size_t i = 0; i < tags.size(); ++i) {
    switch (tags[i]) {
      case PosTag::kPronFirst: ++out.first_person_pronouns; ++out.pronouns; break;
      case PosTag::kPronSecond: ++out.second_person_pronouns; ++out.pronouns; break;
      case PosTag::kPronPossessive: ++out.possessive_pronouns; ++out.pronouns; break;
      case PosTag::kPronOther: ++out.pronouns; break;
      case PosTag::kNoun: ++out.nouns; break;
      case PosTag::kVerb: ++out.verbs; break;
      case PosTag::kAdj: ++out.adjectives; break;
      case PosTag::kAdv: ++out.adverbs; break;
      case PosTag::kPrep: ++out.prepositions; break;
      case PosTag::kDet: ++out.determiners; break;
      case PosTag::kPunct: ++out.punctuation; break;
      case PosTag::kOther: break;
    }
    const std::string& tok = tokens.tokens[i];
    if (lex.stopwords.count(tok)) ++out.stop_words;
    if (lex.slang.count(tok)) ++out.slang_words;
  }
}

inline StructuralFeatures extract_features(std::string_view raw,
                                           const Lexicons& lex = builtin_lexicons(),
                                           const PosTagger* tagger = nullptr) {
  FeatureView view = feature_view(raw);
  StructuralFeatures out;
  extract_sfg(view.text, view.tokens, out);
  RuleBasedPosTagger fallback(lex);
  const PosTagger& t = tagger ? *tagger : fallback;
  extract_pos_counts(t.tag(view.tokens), view.tokens, out, lex);
  return out;
}

// ---------------------------------------------------------------------------
// Standard scaling (population statistics)
// ---------------------------------------------------------------------------

using FeatureMatrix = std::vector<std::vector<double>>;

struct ScalerParams {
  std::vector<double> means;
  std::vector<double> stds;            // 1.0 for degenerate columns
  std::vector<std::uint8_t> degenerate;  // zero-variance flags
};

inline ScalerParams fit_scaler(const FeatureMatrix& matrix) {
  if (matrix.size() < 2) throw DataError("fit_scaler needs at least 2 rows");
  const std::size_t cols = matrix[0].size();
  for (const auto& row : matrix)
    if (row.size() != cols) throw ShapeError("ragged feature matrix");

  ScalerParams p;
  p.means.assign(cols, 0.0);
  p.stds.assign(cols, 0.0);
  p.degenerate.assign(cols, 0);
  const double n = static_cast<double>(matrix.size());
  for (const auto& row : matrix)
    for (std::size_t j = 0; j < cols; ++j) p.means[j] += row[j];
  for (std::size_t j = 0; j < cols; ++j) p.means[j] /= n;
  for (const auto& row : matrix)
    for (std::size_t j = 0; j < cols; ++j) {
      double d = row[j] - p.means[j];
      p.stds[j] += d * d;
    }
  for (std::size_t j = 0; j < cols; ++j) {
    p.stds[j] = std::sqrt(p.stds[j] / n);
    if (p.stds[j] < 1e-15) {
      p.stds[j] = 1.0;
      p.degenerate[j] = 1;
    }
  }
  return p;
}

inline std::vector<double> apply_scaler(const std::vector<double>& row,
                                        const ScalerParams& p) {
  if (row.size() != p.means.size())
    throw ShapeError("row length does not match scaler");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j)
    out[j] = (row[j] - p.means[j]) / p.stds[j];
  return out;
}

inline std::vector<double> inverse_scaler(const std::vector<double>& row,
                                          const ScalerParams& p) {
  if (row.size() != p.means.size())
    throw ShapeError("row length does not match scaler");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j)
    out[j] = row[j] * p.stds[j] + p.means[j];
  return out;
}

inline void scaler_to_json(const ScalerParams& p, nlohmann::json& j) {
  j["format_version"] = 1;
  j["means"] = p.means;
  j["stds"] = p.stds;
  j["degenerate"] = p.degenerate;
}

inline ScalerParams scaler_from_json(const nlohmann::json& j) {
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1)
    throw DataError("unsupported scaler format");
  ScalerParams p;
  p.means = j.at("means").get<std::vector<double>>();
  p.stds = j.at("stds").get<std::vector<double>>();
  p.degenerate = j.at("degenerate").get<std::vector<std::uint8_t>>();
  if (p.means.size() != p.stds.size() || p.means.size() != p.degenerate.size())
    throw DataError("inconsistent scaler fields");
  return p;
}

// ---------------------------------------------------------------------------
// Recursive feature elimination. Ranking estimator: logistic regression
// trained by full-batch gradient descent on per-round standardized columns
// (500 steps, rate 0.1, zero init); the smallest |weight| is dropped each
// round until target_count columns remain.
// ---------------------------------------------------------------------------

struct RfeSelection {
  std::vector<std::string> input_names;
  std::vector<std::string> kept;  // original column order
  std::vector<std::pair<std::string, int>> elimination_order;
  std::uint64_t estimator_seed = 0;

  std::vector<std::size_t> kept_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < input_names.size(); ++i)
      for (const auto& name : kept)
        if (input_names[i] == name) idx.push_back(i);
    return idx;
  }
};

namespace detail {

inline std::vector<double> logistic_weights(const FeatureMatrix& x,
                                            const std::vector<int>& y) {
  const std::size_t n = x.size(), d = x[0].size();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  constexpr int kSteps = 500;
  constexpr double kRate = 0.1;
  std::vector<double> grad(d);
  for (int step = 0; step < kSteps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * x[i][j];
      double p = 1.0 / (1.0 + std::exp(-z));
      double err = p - static_cast<double>(y[i]);
      for (std::size_t j = 0; j < d; ++j) grad[j] += err * x[i][j];
      grad_b += err;
    }
    for (std::size_t j = 0; j < d; ++j) w[j] -= kRate * grad[j] / static_cast<double>(n);
    b -= kRate * grad_b / static_cast<double>(n);
  }
  return w;
}

}  // namespace detail

inline RfeSelection rfe_select(const FeatureMatrix& matrix, const std::vector<int>& labels,
                               const std::vector<std::string>& names,
                               std::size_t target_count = 10, std::uint64_t seed = 0) {
  if (matrix.size() < 20) throw DataError("rfe_select needs at least 20 rows");
  if (matrix.size() != labels.size()) throw ShapeError("labels misaligned with matrix");
  const std::size_t cols = matrix[0].size();
  if (names.size() != cols) throw ShapeError("names misaligned with matrix");
  if (target_count >= cols)
    throw DataError("rfe target_count must be smaller than the column count");
  bool has0 = false, has1 = false;
  for (int l : labels) (l == 0 ? has0 : has1) = true;
  if (!has0 || !has1) throw DataError("rfe_select needs both classes");

  RfeSelection sel;
  sel.input_names = names;
  sel.estimator_seed = seed;

  std::vector<std::size_t> surviving(cols);
  for (std::size_t j = 0; j < cols; ++j) surviving[j] = j;

  int round = 1;
  while (surviving.size() > target_count) {
    // standardize the surviving columns for this round
    FeatureMatrix sub(matrix.size(), std::vector<double>(surviving.size()));
    for (std::size_t i = 0; i < matrix.size(); ++i)
      for (std::size_t j = 0; j < surviving.size(); ++j)
        sub[i][j] = matrix[i][surviving[j]];
    ScalerParams sc = fit_scaler(sub);
    for (auto& row : sub) row = apply_scaler(row, sc);

    std::vector<double> w = detail::logistic_weights(sub, labels);
    std::size_t drop = 0;
    for (std::size_t j = 1; j < w.size(); ++j)
      if (std::abs(w[j]) <= std::abs(w[drop])) drop = j;  // ties: higher index goes
    sel.elimination_order.emplace_back(names[surviving[drop]], round);
    surviving.erase(surviving.begin() + static_cast<std::ptrdiff_t>(drop));
    ++round;
  }
  for (std::size_t j : surviving) sel.kept.push_back(names[j]);
  return sel;
}

inline void rfe_to_json(const RfeSelection& sel, nlohmann::json& j) {
  j["format_version"] = 1;
  j["input_names"] = sel.input_names;
  j["kept"] = sel.kept;
  nlohmann::json order = nlohmann::json::array();
  for (const auto& [name, round] : sel.elimination_order)
    order.push_back({{"feature", name}, {"round", round}});
  j["elimination_order"] = order;
  j["estimator_seed"] = sel.estimator_seed;
}

inline RfeSelection rfe_from_json(const nlohmann::json& j) {
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1)
    throw DataError("unsupported rfe format");
  RfeSelection sel;
  sel.input_names = j.at("input_names").get<std::vector<std::string>>();
  sel.kept = j.at("kept").get<std::vector<std::string>>();
  for (const auto& e : j.at("elimination_order"))
    sel.elimination_order.emplace_back(e.at("feature").get<std::string>(),
                                       e.at("round").get<int>());
  sel.estimator_seed = j.at("estimator_seed").get<std::uint64_t>();
  return sel;
}

}  // namespace clickguard
