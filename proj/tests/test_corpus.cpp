#include <catch2/catch_amalgamated.hpp>

#include "clickguard/corpus.hpp"
#include "support/test_util.hpp"

using namespace clickguard;
using test_support::TempDir;
using test_support::write_file;

TEST_CASE("load_dataset drops rows with missing fields and counts them", "[corpus]") {
  TempDir dir;
  auto p = dir.file("d.csv");
  write_file(p, "headline,label\nfirst story,0\n,1\nsecond story,1\n");
  auto res = load_dataset(p, DatasetFormat::kCsv);
  CHECK(res.records.size() == 2);
  CHECK(res.dropped_missing == 1);
  CHECK(res.records[0].text == "first story");
  CHECK(res.records[0].label == 0);
  CHECK(res.records[1].label == 1);
}

TEST_CASE("load_dataset handles quoted csv fields", "[corpus]") {
  TempDir dir;
  auto p = dir.file("q.csv");
  write_file(p, "headline,label\n\"commas, inside\",1\n\"a \"\"quote\"\"\",0\n");
  auto res = load_dataset(p, DatasetFormat::kCsv);
  REQUIRE(res.records.size() == 2);
  CHECK(res.records[0].text == "commas, inside");
  CHECK(res.records[1].text == "a \"quote\"");
}

TEST_CASE("load_dataset reads tsv and custom column names", "[corpus]") {
  TempDir dir;
  auto p = dir.file("d.tsv");
  write_file(p, "text\ty\nhello world\t1\n");
  LoadOptions opt;
  opt.text_column = "text";
  opt.label_column = "y";
  auto res = load_dataset(p, DatasetFormat::kTsv, opt);
  REQUIRE(res.records.size() == 1);
  CHECK(res.records[0].text == "hello world");
  CHECK(res.records[0].label == 1);
}

TEST_CASE("load_dataset jsonl binarizes graded scores", "[corpus]") {
  TempDir dir;
  auto p = dir.file("d.jsonl");
  write_file(p,
             "{\"text\":\"graded one\",\"truthMean\":0.66}\n"
             "{\"text\":\"graded zero\",\"truthMean\":0.33}\n"
             "{\"text\":\"plain\",\"label\":1}\n"
             "not json at all\n");
  auto res = load_dataset(p, DatasetFormat::kJsonl);
  REQUIRE(res.records.size() == 3);
  CHECK(res.records[0].label == 1);
  CHECK(res.records[0].raw_score.has_value());
  CHECK(res.records[1].label == 0);
  CHECK(res.records[2].label == 1);
  CHECK(!res.records[2].raw_score.has_value());
  CHECK(res.skipped_malformed == 1);
}

TEST_CASE("load_dataset errors", "[corpus]") {
  TempDir dir;
  auto empty = dir.file("empty.csv");
  write_file(empty, "");
  CHECK_THROWS_AS(load_dataset(empty, DatasetFormat::kCsv), DataError);

  auto headers_only = dir.file("h.csv");
  write_file(headers_only, "headline,label\n");
  CHECK_THROWS_AS(load_dataset(headers_only, DatasetFormat::kCsv), DataError);

  CHECK_THROWS_AS(load_dataset(dir.file("nope.csv"), DatasetFormat::kCsv), IoError);

  auto bad_header = dir.file("bad.csv");
  write_file(bad_header, "a,b\nx,0\n");
  CHECK_THROWS_AS(load_dataset(bad_header, DatasetFormat::kCsv), DataError);
}

TEST_CASE("binarize_label maps the four levels and rejects the rest", "[corpus]") {
  CHECK(binarize_label(0.0) == 0);
  CHECK(binarize_label(0.33) == 0);
  CHECK(binarize_label(0.66) == 1);
  CHECK(binarize_label(1.0) == 1);
  CHECK(binarize_label(0.333) == 0);  // within tolerance
  CHECK_THROWS_AS(binarize_label(0.5), DataError);
  CHECK_THROWS_AS(binarize_label(-0.1), DataError);
  CHECK_THROWS_AS(binarize_label(0.34), DataError);
}

TEST_CASE("compute_class_weights is inverse-frequency", "[corpus]") {
  std::vector<int> balanced(10, 0);
  for (int i = 5; i < 10; ++i) balanced[i] = 1;
  auto w = compute_class_weights(balanced);
  CHECK(w.w0 == 1.0);
  CHECK(w.w1 == 1.0);

  // Dataset 3 counts: 1574 non-clickbait, 814 clickbait.
  std::vector<int> d3;
  d3.insert(d3.end(), 1574, 0);
  d3.insert(d3.end(), 814, 1);
  auto wd3 = compute_class_weights(d3);
  CHECK(wd3.w0 == Catch::Approx(2388.0 / (2.0 * 1574.0)).epsilon(1e-15));
  CHECK(wd3.w1 == Catch::Approx(2388.0 / (2.0 * 814.0)).epsilon(1e-15));
  // weighted-count identity: w0*N0 == w1*N1 == N/2
  CHECK(wd3.w0 * 1574.0 == Catch::Approx(2388.0 / 2.0).epsilon(1e-12));
  CHECK(wd3.w1 * 814.0 == Catch::Approx(2388.0 / 2.0).epsilon(1e-12));

  CHECK_THROWS_AS(compute_class_weights(std::vector<int>(4, 1)), DataError);
}

namespace {
std::vector<HeadlineRecord> make_records(std::size_t zeros, std::size_t ones) {
  std::vector<HeadlineRecord> recs;
  for (std::size_t i = 0; i < zeros; ++i)
    recs.push_back({"plain headline " + std::to_string(i), 0, std::nullopt, "t"});
  for (std::size_t i = 0; i < ones; ++i)
    recs.push_back({"catchy headline " + std::to_string(i), 1, std::nullopt, "t"});
  return recs;
}
}  // namespace

TEST_CASE("stratified_split preserves per-class proportions", "[corpus]") {
  auto recs = make_records(6, 4);
  auto split = stratified_split(recs, 0.8, 42);
  std::size_t train0 = 0, train1 = 0;
  for (const auto& r : split.train) (r.label == 0 ? train0 : train1)++;
  // brute-force count oracle: round(0.8*6)=5 within 1, round(0.8*4)=3 within 1
  CHECK(std::abs(static_cast<int>(train0) - 5) <= 1);
  CHECK(std::abs(static_cast<int>(train1) - 3) <= 1);
  CHECK(split.train.size() + split.test.size() == recs.size());
}

TEST_CASE("stratified_split is deterministic and partitions the input", "[corpus]") {
  auto recs = make_records(23, 11);
  auto a = stratified_split(recs, 0.7, 99);
  auto b = stratified_split(recs, 0.7, 99);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i)
    CHECK(a.train[i].text == b.train[i].text);
  for (std::size_t i = 0; i < a.test.size(); ++i)
    CHECK(a.test[i].text == b.test[i].text);

  auto c = stratified_split(recs, 0.7, 100);
  bool same = c.train.size() == a.train.size();
  if (same)
    for (std::size_t i = 0; i < a.train.size(); ++i)
      same = same && a.train[i].text == c.train[i].text;
  CHECK(!same);  // different seed, different shuffle

  // partition: multiset of texts is preserved
  std::vector<std::string> all;
  for (const auto& r : a.train) all.push_back(r.text);
  for (const auto& r : a.test) all.push_back(r.text);
  std::sort(all.begin(), all.end());
  std::vector<std::string> orig;
  for (const auto& r : recs) orig.push_back(r.text);
  std::sort(orig.begin(), orig.end());
  CHECK(all == orig);
}

TEST_CASE("stratified_split stratification property over many shapes", "[corpus]") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 50; ++round) {
    std::size_t n0 = 2 + uniform_index(rng, 40);
    std::size_t n1 = 2 + uniform_index(rng, 40);
    double ratio = 0.5 + 0.4 * uniform_unit(rng);
    auto recs = make_records(n0, n1);
    auto split = stratified_split(recs, ratio, rng());
    std::size_t train0 = 0, train1 = 0;
    for (const auto& r : split.train) (r.label == 0 ? train0 : train1)++;
    CHECK(std::abs(static_cast<double>(train0) - std::round(ratio * double(n0))) <= 1.0);
    CHECK(std::abs(static_cast<double>(train1) - std::round(ratio * double(n1))) <= 1.0);
  }
}

TEST_CASE("stratified_split rejects degenerate input", "[corpus]") {
  auto recs = make_records(6, 4);
  CHECK_THROWS_AS(stratified_split(recs, 1.0, 1), DataError);
  CHECK_THROWS_AS(stratified_split(recs, 0.0, 1), DataError);
  CHECK_THROWS_AS(stratified_split(make_records(5, 1), 0.8, 1), DataError);
  CHECK_THROWS_AS(stratified_split(make_records(0, 8), 0.8, 1), DataError);
}
