#include <catch2/catch_amalgamated.hpp>

#include "clickguard/dumps.hpp"
#include "support/synthetic.hpp"
#include "support/test_util.hpp"

using namespace clickguard;

namespace {

ModelConfig micro_config() {
  ModelConfig c;
  c.d_model = 8;
  c.fusion_dim = 8;
  c.lstm_x1 = 4;
  c.lstm_x2 = 4;
  c.lstm_y1 = 4;
  c.lstm_y2 = 4;
  c.bilstm_hidden = 3;
  c.conv_filters = 4;
  c.conv_window = 3;
  c.mha_heads = 4;
  c.head_dim = 6;
  c.vocab_buckets = 64;
  c.max_len = 8;
  return c;
}

}  // namespace

TEST_CASE("dump stage parsing", "[dumps]") {
  CHECK(parse_dump_stage("contextual_raw") == DumpStage::kContextualRaw);
  CHECK(parse_dump_stage("structural_post_rfe") == DumpStage::kStructuralPostRfe);
  CHECK_THROWS_AS(parse_dump_stage("bogus_stage"), ConfigError);
}

TEST_CASE("dump dimensions follow the stage contract", "[dumps]") {
  auto records = test_support::make_headline_corpus(24, 3);
  ClickGuardModel model = make_model(micro_config(), 4);
  fit_artifacts(model, records, builtin_lexicons(), 4);

  auto csv_dims = [](const std::string& csv) {
    auto header_end = csv.find('\n');
    auto header = csv.substr(0, header_end);
    return std::count(header.begin(), header.end(), ',');  // label + dims
  };

  std::string raw = dump_stage_csv(model, records, DumpStage::kContextualRaw);
  CHECK(csv_dims(raw) == 8);  // d_model
  std::string post_mha = dump_stage_csv(model, records, DumpStage::kContextualPostMha);
  CHECK(csv_dims(post_mha) == 8);
  std::string pre_rfe = dump_stage_csv(model, records, DumpStage::kStructuralPreRfe);
  CHECK(csv_dims(pre_rfe) == 18);
  std::string post_rfe = dump_stage_csv(model, records, DumpStage::kStructuralPostRfe);
  CHECK(csv_dims(post_rfe) == 10);

  // rows appear in input record order: the label column must match
  auto lines = split(post_rfe, '\n');
  REQUIRE(lines.size() >= records.size() + 1);
  for (std::size_t i = 0; i < records.size(); ++i)
    CHECK(lines[i + 1].substr(0, 1) == std::to_string(records[i].label));

  // identical model state -> identical dumps
  CHECK(dump_stage_csv(model, records, DumpStage::kContextualRaw) == raw);
}

TEST_CASE("dump_features writes the epoch-stage cartesian product", "[dumps]") {
  test_support::TempDir dir;
  auto records = test_support::make_headline_corpus(24, 9);
  ClickGuardModel model = make_model(micro_config(), 5);
  fit_artifacts(model, records, builtin_lexicons(), 5);

  std::vector<DumpStage> stages = {DumpStage::kContextualRaw,
                                   DumpStage::kStructuralPostRfe};
  std::size_t written = 0;
  for (std::size_t epoch : {1, 2, 3}) {
    auto paths = dump_features(model, records, epoch, stages, dir.path);
    written += paths.size();
    for (const auto& p : paths) CHECK(std::filesystem::exists(p));
  }
  CHECK(written == 6);  // 2 stages x 3 epochs
  CHECK(std::filesystem::exists(dir.file("dump_e2_contextual_raw.csv")));
  CHECK(std::filesystem::exists(dir.file("dump_e3_structural_post_rfe.csv")));
}

TEST_CASE("dump stages respect ablation flags", "[dumps]") {
  auto records = test_support::make_headline_corpus(24, 11);
  ModelConfig structural_only = micro_config();
  structural_only.use_contextual = false;
  ClickGuardModel m = make_model(structural_only, 6);
  fit_artifacts(m, records, builtin_lexicons(), 6);
  CHECK_THROWS_AS(dump_stage_csv(m, records, DumpStage::kContextualRaw), ConfigError);

  ModelConfig no_mha = micro_config();
  no_mha.use_mha = false;
  ClickGuardModel m2 = make_model(no_mha, 6);
  fit_artifacts(m2, records, builtin_lexicons(), 6);
  CHECK_THROWS_AS(dump_stage_csv(m2, records, DumpStage::kContextualPostMha), ConfigError);
  CHECK(!dump_stage_csv(m2, records, DumpStage::kContextualRaw).empty());
}
