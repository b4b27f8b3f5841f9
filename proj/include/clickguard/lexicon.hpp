#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "clickguard/error.hpp"
#include "clickguard/lexicon_data.hpp"
#include "clickguard/util.hpp"

namespace clickguard {

// Lexicon file format (also used by the embedded blocks): UTF-8, one entry
// per line, fields separated by whitespace, '#' opens a comment.
inline std::vector<std::vector<std::string>> parse_lexicon(std::string_view text) {
  std::vector<std::vector<std::string>> entries;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto fields = split_whitespace(line);
    if (!fields.empty()) entries.push_back(std::move(fields));
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return entries;
}

inline std::unordered_set<std::string> lexicon_set(std::string_view text) {
  std::unordered_set<std::string> out;
  for (auto& e : parse_lexicon(text)) out.insert(e[0]);
  return out;
}

// "form lemma" pairs; single-field lines pin the form to itself.
inline std::unordered_map<std::string, std::string> lexicon_pairs(std::string_view text) {
  std::unordered_map<std::string, std::string> out;
  for (auto& e : parse_lexicon(text)) out[e[0]] = e.size() > 1 ? e[1] : e[0];
  return out;
}

// "word alt1 alt2 ..." groups (synonym lexicon).
inline std::unordered_map<std::string, std::vector<std::string>> lexicon_groups(std::string_view text) {
  std::unordered_map<std::string, std::vector<std::string>> out;
  for (auto& e : parse_lexicon(text)) {
    if (e.size() < 2) continue;
    out[e[0]] = std::vector<std::string>(e.begin() + 1, e.end());
  }
  return out;
}

struct Lexicons {
  std::unordered_set<std::string> stopwords;
  std::unordered_set<std::string> slang;
  std::unordered_map<std::string, std::string> irregular_lemmas;
  std::unordered_map<std::string, std::vector<std::string>> synonyms;
  std::unordered_set<std::string> pron_first;
  std::unordered_set<std::string> pron_second;
  std::unordered_set<std::string> pron_possessive;
  std::unordered_set<std::string> pron_other;
  std::unordered_set<std::string> determiners;
  std::unordered_set<std::string> prepositions;
  std::unordered_set<std::string> verbs;
  std::unordered_set<std::string> adverbs;
  std::unordered_set<std::string> adjectives;
};

inline Lexicons make_builtin_lexicons() {
  Lexicons lex;
  lex.stopwords = lexicon_set(lexicon_data::kStopwords);
  lex.slang = lexicon_set(lexicon_data::kSlang);
  lex.irregular_lemmas = lexicon_pairs(lexicon_data::kIrregularLemmas);
  lex.synonyms = lexicon_groups(lexicon_data::kSynonyms);
  lex.pron_first = lexicon_set(lexicon_data::kPronounsFirst);
  lex.pron_second = lexicon_set(lexicon_data::kPronounsSecond);
  lex.pron_possessive = lexicon_set(lexicon_data::kPronounsPossessive);
  lex.pron_other = lexicon_set(lexicon_data::kPronounsOther);
  lex.determiners = lexicon_set(lexicon_data::kDeterminers);
  lex.prepositions = lexicon_set(lexicon_data::kPrepositions);
  lex.verbs = lexicon_set(lexicon_data::kVerbs);
  lex.adverbs = lexicon_set(lexicon_data::kAdverbs);
  lex.adjectives = lexicon_set(lexicon_data::kAdjectives);
  return lex;
}

inline const Lexicons& builtin_lexicons() {
  static const Lexicons lex = make_builtin_lexicons();
  return lex;
}

// External override: same format, loaded from disk.
inline std::unordered_set<std::string> load_lexicon_file(const std::filesystem::path& path) {
  return lexicon_set(read_text_file(path));
}

}  // namespace clickguard
