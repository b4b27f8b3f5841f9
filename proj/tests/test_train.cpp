#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "clickguard/train.hpp"
#include "support/synthetic.hpp"

using namespace clickguard;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.d_model = 16;
  c.fusion_dim = 16;
  c.lstm_x1 = 8;
  c.lstm_x2 = 8;
  c.lstm_y1 = 8;
  c.lstm_y2 = 8;
  c.bilstm_hidden = 4;
  c.conv_filters = 4;
  c.conv_window = 3;
  c.mha_heads = 4;
  c.head_dim = 8;
  c.vocab_buckets = 512;
  c.max_len = 12;
  return c;
}

}  // namespace

TEST_CASE("lr_at reproduces the cyclic schedule exactly", "[train]") {
  TrainConfig c;
  c.eta_max = 1e-3;
  c.eta_min = 1e-6;
  c.cycle_length = 100;

  CHECK(lr_at(0, c) == 1e-3);
  CHECK(lr_at(c.cycle_length, c) == 1e-3);  // cycle restart via mod
  CHECK(std::abs(lr_at(c.cycle_length / 2, c) - (c.eta_min + (c.eta_max - c.eta_min) / 2.0)) <= 1e-12);

  // independent closed-form evaluation over several steps and cycles
  for (std::size_t t = 0; t < 350; ++t) {
    double phase = static_cast<double>(t % c.cycle_length) / static_cast<double>(c.cycle_length);
    double expected = c.eta_min + 0.5 * (c.eta_max - c.eta_min) * (1.0 + std::cos(phase * 3.14159265358979323846));
    CHECK(std::abs(lr_at(t, c) - expected) <= 1e-18);
    CHECK(lr_at(t, c) >= c.eta_min);
    CHECK(lr_at(t, c) <= c.eta_max);
    CHECK(lr_at(t, c) == lr_at(t + c.cycle_length, c));  // T-periodic
  }
}

TEST_CASE("train config validation", "[train]") {
  TrainConfig c;
  c.eta_min = 1e-3;
  c.eta_max = 1e-3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.cycle_length = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("weighted_bce analytic values", "[train]") {
  // p = 0.5 everywhere, unit weights -> ln 2
  std::vector<double> p(4, 0.5);
  std::vector<int> y = {0, 1, 0, 1};
  CHECK(weighted_bce(p, y) == Catch::Approx(std::log(2.0)).margin(1e-15));

  // perfect predictions clamp to the 1e-7 scale
  std::vector<double> perfect = {1e-9, 1.0 - 1e-9};
  std::vector<int> py = {0, 1};
  CHECK(weighted_bce(perfect, py) < 1e-6);
  CHECK(weighted_bce(perfect, py) > 0.0);

  // weights (1,2), single positive sample at p = 0.5 -> 2 ln 2
  CHECK(weighted_bce({0.5}, {1}, {1.0, 2.0}) ==
        Catch::Approx(2.0 * std::log(2.0)).margin(1e-15));

  // unit weights equal the unweighted loss exactly
  std::vector<double> probs = {0.2, 0.9, 0.4, 0.7};
  CHECK(weighted_bce(probs, y, {1.0, 1.0}) == weighted_bce(probs, y));

  CHECK_THROWS_AS(weighted_bce({0.5}, {1, 0}), ShapeError);
  CHECK_THROWS_AS(weighted_bce({}, {}), DataError);
}

TEST_CASE("weighted_bce_graph matches the value form and differentiates", "[train]") {
  std::vector<int> y = {1, 0, 1};
  ClassWeights w{0.8, 1.7};
  Tensor p = Tensor::from({3}, {0.3, 0.6, 0.9}, true);

  Tape tape;
  Tensor loss = weighted_bce_graph(p, y, w, &tape);
  CHECK(loss.item() == Catch::Approx(weighted_bce({0.3, 0.6, 0.9}, y, w)).margin(1e-15));

  Tensor probs = Tensor::from({3}, {0.3, 0.6, 0.9});
  double err = gradient_check(
      [&](const Tensor& in, Tape* t) { return weighted_bce_graph(in, y, w, t); }, probs);
  CHECK(err < 1e-6);
}

TEST_CASE("metrics arithmetic and undefined cases", "[train]") {
  // all correct
  Metrics all = metrics_from({0.9, 0.1}, {1, 0});
  CHECK(all.accuracy == 1.0);

  // constant p = 0.5: tie goes to class 0, accuracy = class-0 prevalence
  Metrics tie = metrics_from({0.5, 0.5, 0.5, 0.5}, {0, 0, 0, 1});
  CHECK(tie.accuracy == 0.75);
  CHECK(!tie.precision.has_value());  // no positive predictions
  CHECK(tie.recall.has_value());
  CHECK(*tie.recall == 0.0);
  CHECK(!tie.f1.has_value());

  // hand confusion TP=1 FP=1 FN=1 TN=1
  Metrics conf = metrics_from({0.9, 0.9, 0.1, 0.1}, {1, 0, 1, 0});
  CHECK(conf.accuracy == 0.5);
  CHECK(*conf.precision == 0.5);
  CHECK(*conf.recall == 0.5);
  CHECK(*conf.f1 == Catch::Approx(0.5).margin(1e-15));

  CHECK_THROWS_AS(metrics_from({}, {}), DataError);
}

TEST_CASE("train: zero epochs leave the model untouched", "[train]") {
  auto records = test_support::make_separable_corpus(32, 1);
  auto split = stratified_split(records, 0.75, 5);
  ClickGuardModel m = make_model(small_config(), 7);
  auto snapshot = m.encoder.embedding.values();

  TrainConfig cfg;
  cfg.epochs = 0;
  TrainHistory h = train(m, split, cfg);
  CHECK(h.epochs.empty());
  CHECK(h.lr_per_step.empty());
  CHECK(m.encoder.embedding.values() == snapshot);
  CHECK(m.fitted());  // artifacts fitted so the checkpoint is usable
}

TEST_CASE("train is deterministic and the loss moves down", "[train]") {
  auto records = test_support::make_separable_corpus(48, 3);
  auto split = stratified_split(records, 0.75, 9);

  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.seed = 11;
  cfg.eta_max = 0.05;
  cfg.eta_min = 1e-4;
  cfg.cycle_length = 12;

  ClickGuardModel a = make_model(small_config(), 31);
  TrainHistory ha = train(a, split, cfg);
  ClickGuardModel b = make_model(small_config(), 31);
  TrainHistory hb = train(b, split, cfg);

  // bit-identical parameters and history for a fixed seed
  auto pa = a.named_parameters();
  auto pb = b.named_parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i)
    CHECK(pa[i].second->values() == pb[i].second->values());
  REQUIRE(ha.epochs.size() == hb.epochs.size());
  for (std::size_t i = 0; i < ha.epochs.size(); ++i) {
    CHECK(ha.epochs[i].train_loss == hb.epochs[i].train_loss);
    CHECK(ha.epochs[i].val_acc == hb.epochs[i].val_acc);
  }

  // gradient sign is right end-to-end: loss decreases from the first epoch
  CHECK(ha.epochs.back().train_loss < ha.epochs.front().train_loss);

  // per-step learning rates follow the schedule
  REQUIRE(!ha.lr_per_step.empty());
  for (std::size_t t = 0; t < ha.lr_per_step.size(); ++t)
    CHECK(ha.lr_per_step[t] == lr_at(t, cfg));
}

TEST_CASE("train rejects empty input and reports divergence", "[train]") {
  auto records = test_support::make_separable_corpus(32, 4);
  auto split = stratified_split(records, 0.75, 5);
  DatasetSplit empty;
  empty.test = split.test;
  ClickGuardModel m = make_model(small_config(), 1);
  TrainConfig cfg;
  CHECK_THROWS_AS(train(m, empty, cfg), DataError);

  // a poisoned parameter surfaces as a divergence error with a step index
  ClickGuardModel w = make_model(small_config(), 2);
  w.classifier_head.bias.data()[0] = std::numeric_limits<double>::quiet_NaN();
  TrainConfig short_cfg;
  short_cfg.epochs = 1;
  short_cfg.batch_size = 8;
  try {
    train(w, split, short_cfg);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.step == 0);
  }
}

TEST_CASE("artifacts come from the train split only", "[train]") {
  auto records = test_support::make_headline_corpus(60, 12);
  auto split = stratified_split(records, 0.7, 3);

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 16;

  ClickGuardModel a = make_model(small_config(), 5);
  train(a, split, cfg);

  // perturb the test side; the fitted artifacts must not move
  DatasetSplit perturbed = split;
  for (auto& r : perturbed.test) r.text += " extra words appended here!";
  ClickGuardModel b = make_model(small_config(), 5);
  train(b, perturbed, cfg);

  CHECK(a.rfe->kept == b.rfe->kept);
  CHECK(a.scaler->means == b.scaler->means);
  CHECK(a.scaler->stds == b.scaler->stds);
}

TEST_CASE("search_base_lr returns the argmin of its sampled candidates", "[train]") {
  auto records = test_support::make_separable_corpus(32, 8);
  auto split = stratified_split(records, 0.75, 2);

  TrainConfig probe;
  probe.batch_size = 8;
  probe.seed = 19;
  probe.eta_max = 0.05;
  probe.cycle_length = 8;

  auto factory = [] { return make_model(small_config(), 77); };

  auto one = search_base_lr(factory, split, 1, probe);
  REQUIRE(one.tried.size() == 1);
  CHECK(one.best_eta_min == one.tried[0].first);

  auto several = search_base_lr(factory, split, 4, probe);
  REQUIRE(several.tried.size() == 4);
  double best_score = std::numeric_limits<double>::infinity();
  double best_candidate = several.tried[0].first;
  for (auto& [cand, score] : several.tried)
    if (score < best_score) {
      best_score = score;
      best_candidate = cand;
    }
  CHECK(several.best_eta_min == best_candidate);

  CHECK_THROWS_AS(search_base_lr(factory, split, 0, probe), ConfigError);
}

TEST_CASE("history exports are plot-ready", "[train]") {
  TrainHistory h;
  h.epochs.push_back({0.5, 0.25, 1.25, 1.5});
  h.epochs.push_back({0.75, 0.5, 0.75, 1.0});
  h.lr_per_step = {1e-3, 5e-4};

  std::string csv = history_csv(h);
  CHECK(csv.find("epoch,train_acc,val_acc,train_loss,val_loss\n") == 0);
  CHECK(csv.find("0,0.5,0.25,1.25,1.5\n") != std::string::npos);
  CHECK(csv.find("1,0.75,0.5,0.75,1\n") != std::string::npos);

  nlohmann::json j = history_json(h);
  CHECK(j["lr_per_step"].size() == 2);
  CHECK(j["epochs"][1]["train_acc"].get<double>() == 0.75);
}
