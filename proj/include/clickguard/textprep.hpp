#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clickguard/lexicon.hpp"
#include "clickguard/postag.hpp"

namespace clickguard {

// ---------------------------------------------------------------------------
// UTF-8 / codepoint helpers. Scope: NFC composition for Latin letters with
// the common combining marks, and Unicode lowercasing for ASCII, Latin-1
// Supplement and Latin Extended-A. Everything else passes through untouched.
// ---------------------------------------------------------------------------

namespace detail {

// Decodes the codepoint starting at s[i]; advances i. Invalid sequences are
// consumed one byte at a time and returned as that byte's value.
inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  auto cont = [&](std::size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    char32_t cp = (b0 & 0x1Fu) << 6 | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    char32_t cp = (b0 & 0x0Fu) << 12 | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6 |
                  (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    char32_t cp = (b0 & 0x07u) << 18 | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12 |
                  (static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6 |
                  (static_cast<unsigned char>(s[i + 3]) & 0x3Fu);
    i += 4;
    return cp;
  }
  ++i;
  return b0;
}

inline void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::vector<char32_t> decode_all(std::string_view s) {
  std::vector<char32_t> cps;
  cps.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) cps.push_back(decode_utf8(s, i));
  return cps;
}

inline bool is_space_cp(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case 0x0B: case 0x0C:
    case 0xA0: case 0x2028: case 0x2029: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

inline char32_t lower_cp(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  // Latin-1 Supplement uppercase block, multiplication sign excluded
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  // Latin Extended-A: mostly upper/lower pairs
  if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x130) return U'i';   // I with dot above
  if (cp == 0x178) return 0xFF;   // Y with diaeresis
  if (cp == 0x179 || cp == 0x17B || cp == 0x17D) return cp + 1;
  return cp;
}

// combining mark + ASCII base -> precomposed Latin codepoint, 0 if none
inline char32_t compose_latin(char32_t base, char32_t mark) {
  struct Entry { char32_t base, mark, composed; };
  static constexpr Entry kTable[] = {
      {U'a', 0x300, 0xE0}, {U'a', 0x301, 0xE1}, {U'a', 0x302, 0xE2},
      {U'a', 0x303, 0xE3}, {U'a', 0x308, 0xE4}, {U'a', 0x30A, 0xE5},
      {U'e', 0x300, 0xE8}, {U'e', 0x301, 0xE9}, {U'e', 0x302, 0xEA}, {U'e', 0x308, 0xEB},
      {U'i', 0x300, 0xEC}, {U'i', 0x301, 0xED}, {U'i', 0x302, 0xEE}, {U'i', 0x308, 0xEF},
      {U'o', 0x300, 0xF2}, {U'o', 0x301, 0xF3}, {U'o', 0x302, 0xF4},
      {U'o', 0x303, 0xF5}, {U'o', 0x308, 0xF6},
      {U'u', 0x300, 0xF9}, {U'u', 0x301, 0xFA}, {U'u', 0x302, 0xFB}, {U'u', 0x308, 0xFC},
      {U'n', 0x303, 0xF1}, {U'c', 0x327, 0xE7},
      {U'y', 0x301, 0xFD}, {U'y', 0x308, 0xFF},
      {U'A', 0x300, 0xC0}, {U'A', 0x301, 0xC1}, {U'A', 0x302, 0xC2},
      {U'A', 0x303, 0xC3}, {U'A', 0x308, 0xC4}, {U'A', 0x30A, 0xC5},
      {U'E', 0x300, 0xC8}, {U'E', 0x301, 0xC9}, {U'E', 0x302, 0xCA}, {U'E', 0x308, 0xCB},
      {U'I', 0x300, 0xCC}, {U'I', 0x301, 0xCD}, {U'I', 0x302, 0xCE}, {U'I', 0x308, 0xCF},
      {U'O', 0x300, 0xD2}, {U'O', 0x301, 0xD3}, {U'O', 0x302, 0xD4},
      {U'O', 0x303, 0xD5}, {U'O', 0x308, 0xD6},
      {U'U', 0x300, 0xD9}, {U'U', 0x301, 0xDA}, {U'U', 0x302, 0xDB}, {U'U', 0x308, 0xDC},
      {U'N', 0x303, 0xD1}, {U'C', 0x327, 0xC7}, {U'Y', 0x301, 0xDD},
  };
  for (const auto& e : kTable)
    if (e.base == base && e.mark == mark) return e.composed;
  return 0;
}

inline bool is_combining_mark(char32_t cp) { return cp >= 0x300 && cp <= 0x36F; }

inline bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

// Letters for tokenization purposes: ASCII letters plus any non-ASCII
// codepoint that is neither whitespace nor a recognized punctuation mark.
inline bool is_punct_cp(char32_t cp) {
  switch (cp) {
    case U'?': case U'!': case U'#': case U'.': case U',': case U':': case U';':
    case U'"': case U'\'': case U'(': case U')': case U'[': case U']':
    case U'{': case U'}': case U'-':
    case 0x2013: case 0x2014:            // en/em dash
    case 0x2018: case 0x2019:            // curly single quotes
    case 0x201C: case 0x201D:            // curly double quotes
    case 0x2026:                         // ellipsis
      return true;
    default:
      return false;
  }
}

inline bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == 0x2019; }

inline bool is_word_cp(char32_t cp) {
  if (is_ascii_digit(cp)) return true;
  if (cp >= U'a' && cp <= U'z') return true;
  if (cp >= U'A' && cp <= U'Z') return true;
  return cp >= 0x80 && !is_space_cp(cp) && !is_punct_cp(cp);
}

inline bool is_letter_cp(char32_t cp) {
  return is_word_cp(cp) && !is_ascii_digit(cp);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Normalized text and token sequences
// ---------------------------------------------------------------------------

// Lowercase, NFC-composed, single-spaced, trimmed.
struct NormalizedText {
  std::string value;

  std::size_t codepoint_count() const {
    std::size_t n = 0, i = 0;
    while (i < value.size()) {
      detail::decode_utf8(value, i);
      ++n;
    }
    return n;
  }
};

struct TokenSeq {
  std::vector<std::string> tokens;
  // Byte offsets into the normalized source, half-open, strictly increasing.
  std::vector<std::pair<std::size_t, std::size_t>> spans;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

inline NormalizedText normalize(std::string_view raw) {
  auto cps = detail::decode_all(raw);
  // compose combining marks onto ASCII bases where a precomposed form exists
  std::vector<char32_t> composed;
  composed.reserve(cps.size());
  for (char32_t cp : cps) {
    if (detail::is_combining_mark(cp) && !composed.empty()) {
      if (char32_t c = detail::compose_latin(composed.back(), cp); c != 0) {
        composed.back() = c;
        continue;
      }
    }
    composed.push_back(cp);
  }
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  bool seen_content = false;
  for (char32_t cp : composed) {
    if (detail::is_space_cp(cp)) {
      pending_space = seen_content;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    detail::encode_utf8(detail::lower_cp(cp), out);
    seen_content = true;
  }
  return NormalizedText{std::move(out)};
}

// Whitespace split with listed punctuation marks broken out as standalone
// tokens; apostrophes flanked by word characters stay inside the token.
inline TokenSeq tokenize(const NormalizedText& text) {
  TokenSeq seq;
  std::string_view s = text.value;
  std::size_t i = 0;
  std::size_t tok_start = 0;
  bool in_token = false;
  auto flush = [&](std::size_t end) {
    if (in_token && end > tok_start) {
      seq.tokens.emplace_back(s.substr(tok_start, end - tok_start));
      seq.spans.emplace_back(tok_start, end);
    }
    in_token = false;
  };
  while (i < s.size()) {
    std::size_t cp_start = i;
    char32_t cp = detail::decode_utf8(s, i);
    if (detail::is_space_cp(cp)) {
      flush(cp_start);
      continue;
    }
    if (detail::is_punct_cp(cp)) {
      if (detail::is_apostrophe(cp) && in_token) {
        std::size_t peek = i;
        if (peek < s.size()) {
          char32_t next = detail::decode_utf8(s, peek);
          if (detail::is_word_cp(next)) continue;  // don't, o'clock
        }
      }
      flush(cp_start);
      seq.tokens.emplace_back(s.substr(cp_start, i - cp_start));
      seq.spans.emplace_back(cp_start, i);
      continue;
    }
    if (!in_token) {
      tok_start = cp_start;
      in_token = true;
    }
  }
  flush(s.size());
  return seq;
}

// ---------------------------------------------------------------------------
// Lemmatization: suffix rules plus the bundled irregular-form lexicon.
// ---------------------------------------------------------------------------

namespace detail {

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline bool sibilant_stem(std::string_view stem) {
  return ends_with(stem, "s") || ends_with(stem, "x") || ends_with(stem, "z") ||
         ends_with(stem, "ch") || ends_with(stem, "sh");
}

inline bool doubled_final_consonant(std::string_view s) {
  if (s.size() < 2) return false;
  char a = s[s.size() - 2], b = s[s.size() - 1];
  if (a != b) return false;
  switch (b) {
    case 'b': case 'd': case 'g': case 'm': case 'n': case 'p': case 'r': case 't':
      return true;
    default:
      return false;  // ll, ss, zz and vowels stay
  }
}

}  // namespace detail

// token must be lowercase (the FEATURE/ENCODER views guarantee it).
inline std::string lemmatize(const std::string& token,
                             std::optional<PosTag> pos_hint = std::nullopt,
                             const Lexicons& lex = builtin_lexicons()) {
  if (auto it = lex.irregular_lemmas.find(token); it != lex.irregular_lemmas.end())
    return it->second;

  using detail::ends_with;
  const bool allow_noun = !pos_hint || *pos_hint == PosTag::kNoun || *pos_hint == PosTag::kVerb;
  const bool allow_verb = !pos_hint || *pos_hint == PosTag::kVerb;
  std::string_view t = token;

  if (ends_with(t, "'s") && t.size() >= 4) return std::string(t.substr(0, t.size() - 2));

  if (allow_noun) {
    if (ends_with(t, "ies") && t.size() >= 5)
      return std::string(t.substr(0, t.size() - 3)) + "y";
    if (ends_with(t, "es") && t.size() >= 4 &&
        detail::sibilant_stem(t.substr(0, t.size() - 2)))
      return std::string(t.substr(0, t.size() - 2));
    if (ends_with(t, "s") && t.size() >= 4 && !ends_with(t, "ss") &&
        !ends_with(t, "us") && !ends_with(t, "is"))
      return std::string(t.substr(0, t.size() - 1));
  }
  if (allow_verb) {
    // stems shorter than 3 are left alone (bring, thing, sped); the
    // exception lexicon carries the real short forms (going, doing)
    if (ends_with(t, "ing") && t.size() >= 6) {
      std::string stem(t.substr(0, t.size() - 3));
      if (detail::doubled_final_consonant(stem)) stem.pop_back();
      if (stem.size() >= 3) return stem;
    }
    if (ends_with(t, "ed") && t.size() >= 5) {
      std::string stem(t.substr(0, t.size() - 2));
      if (detail::doubled_final_consonant(stem)) stem.pop_back();
      if (stem.size() >= 3) return stem;
    }
  }
  return token;
}

inline bool is_stopword(const std::string& token,
                        const Lexicons& lex = builtin_lexicons()) {
  return lex.stopwords.count(token) > 0;
}

// ---------------------------------------------------------------------------
// The two preprocessing views of a headline.
//   FEATURE view: normalized + tokenized, nothing removed (Table 1 counting).
//   ENCODER view: special characters and digits stripped, stop words removed,
//   lemmatized (feeds token-ID mapping).
// ---------------------------------------------------------------------------

struct FeatureView {
  NormalizedText text;
  TokenSeq tokens;
};

inline FeatureView feature_view(std::string_view raw) {
  FeatureView v;
  v.text = normalize(raw);
  v.tokens = tokenize(v.text);
  return v;
}

inline std::vector<std::string> encoder_view(std::string_view raw,
                                             const Lexicons& lex = builtin_lexicons()) {
  FeatureView v = feature_view(raw);
  std::vector<std::string> out;
  out.reserve(v.tokens.size());
  for (const auto& tok : v.tokens.tokens) {
    // keep letters and in-word apostrophes, drop digits and symbols
    std::vector<char32_t> kept;
    std::size_t i = 0;
    while (i < tok.size()) {
      char32_t cp = detail::decode_utf8(tok, i);
      if (detail::is_letter_cp(cp) || detail::is_apostrophe(cp)) kept.push_back(cp);
    }
    while (!kept.empty() && detail::is_apostrophe(kept.front())) kept.erase(kept.begin());
    while (!kept.empty() && detail::is_apostrophe(kept.back())) kept.pop_back();
    bool has_letter = false;
    for (char32_t cp : kept) has_letter |= detail::is_letter_cp(cp);
    if (!has_letter) continue;
    std::string cleaned;
    for (char32_t cp : kept) detail::encode_utf8(cp, cleaned);
    if (is_stopword(cleaned, lex)) continue;
    out.push_back(lemmatize(cleaned, std::nullopt, lex));
  }
  return out;
}

}  // namespace clickguard
