#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "clickguard/layers.hpp"
#include "support/test_util.hpp"

using namespace clickguard;

namespace {
Tensor random_tensor(Shape shape, std::mt19937_64& rng, bool requires_grad = false,
                     double center = 0.0, double spread = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (std::size_t i = 0; i < t.size(); ++i)
    t.data()[i] = center + spread * normal_draw(rng);
  return t;
}
}  // namespace

TEST_CASE("dense_forward contracts", "[layers]") {
  DenseParams p;
  p.weight = Tensor::from({2, 2}, {1, 0, 0, 1});
  p.bias = Tensor::zeros({2});
  Tensor x = Tensor::from({1, 2}, {3.5, -1.25});
  CHECK(dense_forward(x, p, Activation::kNone).values() == x.values());

  DenseParams zero;
  zero.weight = Tensor::zeros({2, 1});
  zero.bias = Tensor::zeros({1});
  Tensor head = dense_forward(x, zero, Activation::kSigmoid);
  CHECK(head.item() == 0.5);

  std::mt19937_64 rng(21);
  DenseParams dp = make_dense(4, 3, rng);
  Tensor in = random_tensor({2, 4}, rng, 0.6, 1.0);
  double err = gradient_check(
      [&](const Tensor& v, Tape* t) {
        return sum_all(dense_forward(v, dp, Activation::kRelu, t), t);
      },
      in);
  CHECK(err < 1e-4);
}

TEST_CASE("lstm_forward zero weights give zero states", "[layers]") {
  LstmParams p;
  p.hidden = 3;
  p.w_input = Tensor::zeros({2, 12}, true);
  p.w_hidden = Tensor::zeros({3, 12}, true);
  p.bias = Tensor::zeros({12}, true);
  std::mt19937_64 rng(22);
  Tensor seq = random_tensor({2, 4, 2}, rng);
  Tensor out = lstm_forward(seq, p);
  REQUIRE(out.shape() == Shape{2, 4, 3});
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == 0.0);
}

TEST_CASE("lstm_forward single step matches the closed form", "[layers]") {
  std::mt19937_64 rng(23);
  LstmParams p = make_lstm(2, 2, rng);
  Tensor seq = random_tensor({1, 1, 2}, rng);
  Tensor out = lstm_forward(seq, p);

  // hand-computed one-step gate arithmetic
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double* x = seq.data();
  for (std::size_t j = 0; j < 2; ++j) {
    auto z = [&](std::size_t block) {
      double acc = p.bias.data()[block * 2 + j];
      for (std::size_t i = 0; i < 2; ++i) acc += x[i] * p.w_input.data()[i * 8 + block * 2 + j];
      return acc;  // h_prev = 0 contributes nothing
    };
    double gi = sig(z(0)), gc = std::tanh(z(2)), go = sig(z(3));
    double c = gi * gc;
    double expected = go * std::tanh(c);
    CHECK(out.data()[j] == Catch::Approx(expected).margin(1e-12));
  }
}

TEST_CASE("lstm shapes hold for any length and direction", "[layers]") {
  std::mt19937_64 rng(24);
  LstmParams p = make_lstm(3, 5, rng);
  for (std::size_t len : {1, 2, 7}) {
    Tensor seq = random_tensor({2, len, 3}, rng);
    CHECK(lstm_forward(seq, p, LstmDirection::kForward).shape() == Shape{2, len, 5});
    CHECK(lstm_forward(seq, p, LstmDirection::kBackward).shape() == Shape{2, len, 5});
  }
}

TEST_CASE("backward lstm is the forward lstm on the reversed sequence", "[layers]") {
  std::mt19937_64 rng(25);
  LstmParams p = make_lstm(2, 3, rng);
  Tensor seq = random_tensor({1, 5, 2}, rng);
  Tensor rev = Tensor::zeros({1, 5, 2});
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t d = 0; d < 2; ++d)
      rev.data()[(4 - t) * 2 + d] = seq.data()[t * 2 + d];

  Tensor bwd = lstm_forward(seq, p, LstmDirection::kBackward);
  Tensor fwd_rev = lstm_forward(rev, p, LstmDirection::kForward);
  for (std::size_t t = 0; t < 5; ++t)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(bwd.data()[t * 3 + j] ==
            Catch::Approx(fwd_rev.data()[(4 - t) * 3 + j]).margin(1e-12));
}

TEST_CASE("bilstm doubles the channel width and checks direction sizes", "[layers]") {
  std::mt19937_64 rng(26);
  LstmParams fwd = make_lstm(4, 8, rng);
  LstmParams bwd = make_lstm(4, 8, rng);
  Tensor seq = random_tensor({3, 6, 4}, rng);
  Tensor out = bilstm_forward(seq, fwd, bwd);
  CHECK(out.shape() == Shape{3, 6, 16});

  LstmParams zf;
  zf.hidden = 2;
  zf.w_input = Tensor::zeros({4, 8});
  zf.w_hidden = Tensor::zeros({2, 8});
  zf.bias = Tensor::zeros({8});
  LstmParams zb = zf;
  Tensor zero_out = bilstm_forward(seq, zf, zb);
  for (std::size_t i = 0; i < zero_out.size(); ++i) CHECK(zero_out.data()[i] == 0.0);

  LstmParams small = make_lstm(4, 5, rng);
  CHECK_THROWS_AS(bilstm_forward(seq, fwd, small), ConfigError);
}

TEST_CASE("lstm gradient check", "[layers]") {
  std::mt19937_64 rng(27);
  LstmParams p = make_lstm(2, 3, rng);
  Tensor seq = random_tensor({2, 3, 2}, rng, 0.3, 0.8);
  double err = gradient_check(
      [&](const Tensor& in, Tape* t) { return sum_all(lstm_forward(in, p, LstmDirection::kForward, t), t); },
      seq);
  CHECK(err < 1e-4);

  // parameter gradients too
  double werr = gradient_check(
      [&](const Tensor& w, Tape* t) {
        LstmParams q = p;
        q.w_hidden = w;
        return sum_all(lstm_forward(seq, q, LstmDirection::kBackward, t), t);
      },
      p.w_hidden);
  CHECK(werr < 1e-4);
}

TEST_CASE("conv1d_forward window arithmetic", "[layers]") {
  // U=[[1],[2],[3]], W=[[1],[1]], b=0 -> [3,5]
  Tensor u = Tensor::from({1, 3, 1}, {1, 2, 3});
  Tensor w = Tensor::from({1, 2}, {1, 1});
  Tensor b = Tensor::zeros({1});
  Tensor out = conv1d_forward(u, w, b, 2);
  REQUIRE(out.shape() == Shape{1, 2, 1});
  CHECK(out.values() == std::vector<double>{3, 5});

  // zero filters, bias 1 -> all ones after ReLU
  Tensor wz = Tensor::zeros({4, 2});
  Tensor b1 = Tensor::full({4}, 1.0);
  Tensor ones = conv1d_forward(u, wz, b1, 2);
  for (std::size_t i = 0; i < ones.size(); ++i) CHECK(ones.data()[i] == 1.0);

  // window == length -> single output position
  Tensor w3 = Tensor::from({1, 3}, {1, 1, 1});
  Tensor single = conv1d_forward(u, w3, b, 3);
  CHECK(single.shape() == Shape{1, 1, 1});
  CHECK(single.item() == 6.0);

  CHECK_THROWS_AS(conv1d_forward(u, Tensor::zeros({1, 4}), b, 4), ShapeError);

  // outputs are never negative (ReLU)
  std::mt19937_64 rng(28);
  Tensor ru = random_tensor({2, 9, 3}, rng);
  Tensor rw = random_tensor({5, 9}, rng);
  Tensor rb = random_tensor({5}, rng);
  Tensor ro = conv1d_forward(ru, rw, rb, 3);
  CHECK(ro.shape() == Shape{2, 7, 5});
  for (std::size_t i = 0; i < ro.size(); ++i) CHECK(ro.data()[i] >= 0.0);
}

TEST_CASE("conv1d gradient check", "[layers]") {
  std::mt19937_64 rng(29);
  Tensor u = random_tensor({1, 6, 2}, rng, 0.5, 1.0);
  Tensor w = random_tensor({3, 6}, rng);
  Tensor b = random_tensor({3}, rng, 0.5, 0.2);
  double err = gradient_check(
      [&](const Tensor& in, Tape* t) { return sum_all(conv1d_forward(in, w, b, 3, t), t); }, u);
  CHECK(err < 1e-4);
}

TEST_CASE("mha_forward attention properties", "[layers]") {
  std::mt19937_64 rng(30);
  MhaParams p = make_mha(8, 4, rng);
  Tensor x = random_tensor({2, 5, 8}, rng);
  std::vector<std::uint8_t> mask(2 * 5, 1);
  mask[1 * 5 + 3] = 0;  // pad one key position in record 1
  mask[1 * 5 + 4] = 0;

  std::vector<Tensor> attn;
  Tensor out = mha_forward(x, mask, p, nullptr, &attn);
  CHECK(out.shape() == x.shape());
  REQUIRE(attn.size() == 4);
  for (const auto& a : attn) {
    REQUIRE(a.shape() == Shape{2, 5, 5});
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t q = 0; q < 5; ++q) {
        double sum = 0.0;
        for (std::size_t k = 0; k < 5; ++k) {
          double w = a.data()[(b * 5 + q) * 5 + k];
          if (!mask[b * 5 + k]) CHECK(w <= 1e-12);  // masked keys get no weight
          sum += w;
        }
        CHECK(sum == Catch::Approx(1.0).margin(1e-9));
      }
  }
}

TEST_CASE("mha_forward single position attends to itself", "[layers]") {
  std::mt19937_64 rng(31);
  MhaParams p = make_mha(4, 2, rng);
  Tensor x = random_tensor({1, 1, 4}, rng);
  std::vector<std::uint8_t> mask = {1};
  std::vector<Tensor> attn;
  mha_forward(x, mask, p, nullptr, &attn);
  for (const auto& a : attn) CHECK(a.item() == 1.0);
}

TEST_CASE("mha_forward with zero output projection is LayerNorm(x)", "[layers]") {
  std::mt19937_64 rng(32);
  MhaParams p = make_mha(8, 4, rng);
  for (std::size_t i = 0; i < p.w_out.size(); ++i) p.w_out.data()[i] = 0.0;
  Tensor x = random_tensor({2, 3, 8}, rng);
  std::vector<std::uint8_t> mask(6, 1);
  Tensor out = mha_forward(x, mask, p);
  Tensor expected = layer_norm(x, p.ln_gain, p.ln_bias);
  for (std::size_t i = 0; i < out.size(); ++i)
    CHECK(out.data()[i] == Catch::Approx(expected.data()[i]).margin(1e-12));
}

TEST_CASE("mha_forward validates configuration", "[layers]") {
  std::mt19937_64 rng(33);
  CHECK_THROWS_AS(make_mha(10, 4, rng), ConfigError);
  MhaParams p = make_mha(8, 4, rng);
  Tensor x = random_tensor({1, 3, 8}, rng);
  CHECK_THROWS_AS(mha_forward(x, std::vector<std::uint8_t>(2, 1), p), ShapeError);
}

TEST_CASE("mha gradient check", "[layers]") {
  std::mt19937_64 rng(34);
  MhaParams p = make_mha(4, 2, rng);
  Tensor x = random_tensor({1, 3, 4}, rng, 0.4, 0.8);
  std::vector<std::uint8_t> mask(3, 1);
  // random readout weights; a plain sum cancels across layer-norm slices
  Tensor readout = random_tensor({1, 3, 4}, rng);
  double err = gradient_check(
      [&](const Tensor& in, Tape* t) {
        return sum_all(mul(mha_forward(in, mask, p, t), readout, t), t);
      },
      x, 1e-5);
  CHECK(err < 1e-4);

  double werr = gradient_check(
      [&](const Tensor& w, Tape* t) {
        MhaParams q = p;
        q.w_query[0] = w;
        return sum_all(mul(mha_forward(x, mask, q, t), readout, t), t);
      },
      p.w_query[0], 1e-5);
  CHECK(werr < 1e-4);
}

TEST_CASE("dropout modes", "[layers]") {
  std::mt19937_64 rng(35);
  Tensor x = random_tensor({100}, rng);

  std::mt19937_64 drop_rng(1);
  Tensor inference = dropout(x, 0.4, /*training=*/false, drop_rng);
  CHECK(inference.values() == x.values());

  Tensor zero_rate = dropout(x, 0.0, /*training=*/true, drop_rng);
  CHECK(zero_rate.values() == x.values());

  CHECK_THROWS_AS(dropout(x, 1.0, true, drop_rng), ConfigError);

  // survivor fraction: rate 0.4 over 1e5 elements -> 0.6 +- 0.01
  Tensor big = Tensor::full({100000}, 1.0);
  std::mt19937_64 big_rng(7);
  Tensor dropped = dropout(big, 0.4, true, big_rng);
  std::size_t survivors = 0;
  for (std::size_t i = 0; i < dropped.size(); ++i)
    if (dropped.data()[i] != 0.0) {
      CHECK(dropped.data()[i] == Catch::Approx(1.0 / 0.6).margin(1e-12));
      ++survivors;
    }
  double fraction = static_cast<double>(survivors) / 100000.0;
  CHECK(std::abs(fraction - 0.6) < 0.01);
}

TEST_CASE("encoder batches, pads and masks", "[layers]") {
  EncoderConfig cfg;
  cfg.vocab_buckets = 64;
  cfg.d_model = 8;
  cfg.max_len = 4;
  std::mt19937_64 rng(36);
  EncoderParams params = make_encoder(cfg, rng);

  auto batch = make_encoded_batch({{}, {"cat", "run"}}, cfg);
  REQUIRE(batch.batch == 2);
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(batch.ids[t] == kPadId);  // empty text -> all-pad row
    CHECK(batch.mask[t] == 0);
  }
  CHECK(batch.mask[4] == 1);
  CHECK(batch.mask[5] == 1);
  CHECK(batch.mask[6] == 0);

  Tensor enc = encode(batch, cfg, params);
  CHECK(enc.shape() == Shape{2, 4, 8});

  // same token at two positions: table rows equal, position terms differ
  auto rep = make_encoded_batch({{"echo", "x", "y", "echo"}}, cfg);
  Tensor enc2 = encode(rep, cfg, params);
  Tensor pe = sinusoidal_positions(4, 8);
  for (std::size_t d = 0; d < 8; ++d) {
    double row0 = enc2.data()[0 * 8 + d] - pe.data()[0 * 8 + d];
    double row3 = enc2.data()[3 * 8 + d] - pe.data()[3 * 8 + d];
    CHECK(row0 == Catch::Approx(row3).margin(1e-12));
  }

  // truncation keeps the head
  auto longer = make_encoded_batch({{"a", "b", "c", "d", "e", "f"}}, cfg);
  CHECK(longer.ids[3] == token_bucket("d", cfg.vocab_buckets));
}

TEST_CASE("precomputed embeddings binary and csv round trip", "[layers]") {
  test_support::TempDir dir;
  std::vector<float> payload(2 * 3 * 4);
  for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<float>(i) * 0.5f;
  auto bin = dir.file("emb.bin");
  PrecomputedEmbeddings::write_binary(bin, 2, 3, 4, payload);
  auto loaded = PrecomputedEmbeddings::load(bin, 3, 4);
  Tensor rows = loaded.rows({1, 0});
  REQUIRE(rows.shape() == Shape{2, 3, 4});
  CHECK(rows.data()[0] == 6.0);   // record 1 starts at flat index 12 -> 6.0
  CHECK(rows.data()[12] == 0.0);  // record 0

  CHECK_THROWS_AS(loaded.rows({5}), DataError);
  CHECK_THROWS_AS(PrecomputedEmbeddings::load(bin, 3, 5), DataError);

  auto csv = dir.file("emb.csv");
  test_support::write_file(csv, "index,v0,v1,v2,v3\n7,1,2,3,4\n");
  auto small = PrecomputedEmbeddings::load(csv, 2, 2);
  Tensor r = small.rows({7});
  CHECK(r.shape() == Shape{1, 2, 2});
  CHECK(r.values() == std::vector<double>{1, 2, 3, 4});
  CHECK_THROWS_AS(small.rows({0}), DataError);
}

TEST_CASE("glorot init is deterministic per seed", "[layers]") {
  std::mt19937_64 a(5), b(5), c(6);
  Tensor ta = glorot_uniform({4, 4}, 4, 4, a);
  Tensor tb = glorot_uniform({4, 4}, 4, 4, b);
  Tensor tc = glorot_uniform({4, 4}, 4, 4, c);
  CHECK(ta.values() == tb.values());
  CHECK(ta.values() != tc.values());
}
