#include <catch2/catch_amalgamated.hpp>

#include "clickguard/lexicon.hpp"
#include "clickguard/textprep.hpp"
#include "clickguard/util.hpp"
#include "support/test_util.hpp"

using namespace clickguard;

TEST_CASE("lexicon files parse the one-entry-per-line format", "[textprep]") {
  auto entries = parse_lexicon("# comment\nword\n  indented   # trailing\npair value\n\n");
  REQUIRE(entries.size() == 3);
  CHECK(entries[0] == std::vector<std::string>{"word"});
  CHECK(entries[1] == std::vector<std::string>{"indented"});
  CHECK(entries[2] == std::vector<std::string>{"pair", "value"});

  test_support::TempDir dir;
  auto p = dir.file("extra.txt");
  test_support::write_file(p, "# custom stop words\nfoo\nbar\n");
  auto set = load_lexicon_file(p);
  CHECK(set.count("foo") == 1);
  CHECK(set.count("bar") == 1);
  CHECK(set.size() == 2);
}

TEST_CASE("normalize lowercases, collapses whitespace and trims", "[textprep]") {
  CHECK(normalize("The  CAT Runs!").value == "the cat runs!");
  CHECK(normalize("already normal").value == "already normal");
  CHECK(normalize("  ").value == "");
  CHECK(normalize("").value == "");
  CHECK(normalize("\tTabs\tand\nnewlines ").value == "tabs and newlines");
}

TEST_CASE("normalize is idempotent", "[textprep]") {
  const char* samples[] = {
      "The  CAT Runs!", "  mixed   CASE   and    gaps  ", "", "ALL CAPS",
      "21 Secrets Chinese Restaurants Waiters Will Never Tell You",
      "what's UP?!  #hashtag (parens) -- dashes",
  };
  for (const char* s : samples) {
    auto once = normalize(s);
    auto twice = normalize(once.value);
    CHECK(once.value == twice.value);
  }
}

TEST_CASE("normalize handles unicode case and composition", "[textprep]") {
  CHECK(normalize("CAF\xC3\x89").value == "caf\xC3\xA9");       // precomposed E-acute
  CHECK(normalize("cafe\xCC\x81").value == "caf\xC3\xA9");      // combining acute
  CHECK(normalize("\xC5\xB9le").value == "\xC5\xBAle");         // Latin Ext-A Z-acute
}

TEST_CASE("tokenize splits punctuation but keeps in-word apostrophes", "[textprep]") {
  auto t = tokenize(normalize("will you?"));
  REQUIRE(t.tokens == std::vector<std::string>{"will", "you", "?"});

  CHECK(tokenize(normalize("")).tokens.empty());

  auto apo = tokenize(normalize("don't stop"));
  CHECK(apo.tokens == std::vector<std::string>{"don't", "stop"});

  auto digits = tokenize(normalize("21 secrets"));
  CHECK(digits.tokens == std::vector<std::string>{"21", "secrets"});

  auto multi = tokenize(normalize("omg!! #fail (really)"));
  CHECK(multi.tokens ==
        std::vector<std::string>{"omg", "!", "!", "#", "fail", "(", "really", ")"});

  auto dash = tokenize(normalize("e-mail me"));
  CHECK(dash.tokens == std::vector<std::string>{"e", "-", "mail", "me"});
}

TEST_CASE("tokenize spans index the source exactly", "[textprep]") {
  const char* samples[] = {
      "will you?", "don't stop believing!", "21 secrets #wow  ...", "a",
      "\"quoted\" words (and more)",
  };
  for (const char* s : samples) {
    auto norm = normalize(s);
    auto seq = tokenize(norm);
    REQUIRE(seq.tokens.size() == seq.spans.size());
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      auto [b, e] = seq.spans[i];
      CHECK(b >= prev_end);
      CHECK(e > b);
      CHECK(norm.value.substr(b, e - b) == seq.tokens[i]);
      for (char c : seq.tokens[i]) CHECK(!std::isspace(static_cast<unsigned char>(c)));
      prev_end = e;
    }
  }
}

TEST_CASE("lemmatize applies suffix rules with the exception lexicon", "[textprep]") {
  CHECK(lemmatize("running") == "run");
  CHECK(lemmatize("news") == "news");
  CHECK(lemmatize("cat") == "cat");
  CHECK(lemmatize("secrets") == "secret");
  CHECK(lemmatize("cities") == "city");
  CHECK(lemmatize("boxes") == "box");
  CHECK(lemmatize("stopped") == "stop");
  CHECK(lemmatize("making") == "make");
  CHECK(lemmatize("children") == "child");
  CHECK(lemmatize("waiter's") == "waiter");
  CHECK(!lemmatize("s").empty());
}

TEST_CASE("lemmatize respects the pos hint", "[textprep]") {
  CHECK(lemmatize("winning", PosTag::kNoun) == "winning");  // verbal rule gated off
  CHECK(lemmatize("winning") == "win");
  CHECK(lemmatize("secrets", PosTag::kNoun) == "secret");
  CHECK(lemmatize("quickly", PosTag::kAdv) == "quickly");
}

TEST_CASE("lemmatize is idempotent over the bundled lexicons", "[textprep]") {
  const auto& lex = builtin_lexicons();
  auto check_set = [&](const std::unordered_set<std::string>& words) {
    for (const auto& w : words) {
      auto once = lemmatize(w);
      CHECK(lemmatize(once) == once);
    }
  };
  check_set(lex.stopwords);
  check_set(lex.slang);
  check_set(lex.adjectives);
  check_set(lex.verbs);
  for (const auto& [form, lemma] : lex.irregular_lemmas) {
    CHECK(lemmatize(form) == lemma);
    CHECK(lemmatize(lemmatize(form)) == lemmatize(form));
  }
}

TEST_CASE("bundled lexicons are hash-pinned", "[textprep]") {
  // editing a lexicon must be a deliberate act: update the pin with it
  CHECK(fnv1a64(lexicon_data::kStopwords) == 0x587f3a0f2be9a860ull);
  CHECK(fnv1a64(lexicon_data::kIrregularLemmas) == 0xb56c8432df4107a6ull);
  CHECK(fnv1a64(lexicon_data::kSlang) == 0xce1288ebec237edbull);
  CHECK(fnv1a64(lexicon_data::kSynonyms) == 0x8a3fa0081f8d9de0ull);

  const auto& lex = builtin_lexicons();
  CHECK(lex.stopwords.size() >= 140);
  CHECK(lex.slang.size() >= 140);
  CHECK(lex.slang.count("bae") == 1);
  CHECK(lex.slang.count("omg") == 1);
  CHECK(lex.synonyms.size() >= 50);
}

TEST_CASE("is_stopword consults the bundled list", "[textprep]") {
  CHECK(is_stopword("the"));
  CHECK(is_stopword("you"));
  CHECK(!is_stopword("ferry"));
  CHECK(!is_stopword("omg"));
}

TEST_CASE("encoder view removes digits, punctuation and stop words", "[textprep]") {
  auto toks = encoder_view("The 21 CAT! runs  away");
  CHECK(toks == std::vector<std::string>{"cat", "run", "away"});

  auto empty = encoder_view("the a of 42 !!");
  CHECK(empty.empty());

  auto apo = encoder_view("waiters don't tell");
  CHECK(apo == std::vector<std::string>{"waiter", "tell"});
}

TEST_CASE("tokenize after normalize never yields whitespace tokens", "[textprep]") {
  std::mt19937_64 rng(7);
  const std::string alphabet = "ab C?!# .,'-\t\n9";
  for (int round = 0; round < 200; ++round) {
    std::string s;
    std::size_t n = uniform_index(rng, 24);
    for (std::size_t i = 0; i < n; ++i)
      s.push_back(alphabet[uniform_index(rng, alphabet.size())]);
    auto seq = tokenize(normalize(s));
    for (const auto& tok : seq.tokens) {
      CHECK(!tok.empty());
      for (char c : tok) CHECK(!std::isspace(static_cast<unsigned char>(c)));
    }
  }
}
