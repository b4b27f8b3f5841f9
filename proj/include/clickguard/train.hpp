#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "clickguard/corpus.hpp"
#include "clickguard/ssafb.hpp"

#include <json.hpp>

namespace clickguard {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double eta_max = 1e-3;            // Eq. 11 ceiling
  double eta_min = 1e-6;            // the tunable base rate
  std::size_t cycle_length = 100;   // T, counted in optimizer steps
  std::uint64_t seed = 0;
  std::size_t base_lr_search_budget = 8;

  void validate() const {
    if (!(eta_min < eta_max)) throw ConfigError("eta_min must be below eta_max");
    if (cycle_length < 2) throw ConfigError("cycle_length must be at least 2");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  }
};

// eta(t) = eta_min + (eta_max - eta_min)/2 * (1 + cos(pi * (t mod T) / T))
inline double lr_at(std::size_t t, const TrainConfig& c) {
  const double phase = static_cast<double>(t % c.cycle_length) /
                       static_cast<double>(c.cycle_length);
  return c.eta_min + 0.5 * (c.eta_max - c.eta_min) *
                         (1.0 + std::cos(3.14159265358979323846 * phase));
}

// ---------------------------------------------------------------------------
// Class-weighted binary cross-entropy
// ---------------------------------------------------------------------------

inline constexpr double kProbClamp = 1e-7;

// Value-level: mean over samples of -w_y * [y log p + (1-y) log(1-p)].
inline double weighted_bce(const std::vector<double>& p, const std::vector<int>& y,
                           const ClassWeights& w = {1.0, 1.0}) {
  if (p.size() != y.size()) throw ShapeError("weighted_bce: length mismatch");
  if (p.empty()) throw DataError("weighted_bce: empty inputs");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double pi = std::min(std::max(p[i], kProbClamp), 1.0 - kProbClamp);
    double nll = y[i] == 1 ? -std::log(pi) : -std::log(1.0 - pi);
    acc += (y[i] == 1 ? w.w1 : w.w0) * nll;
  }
  return acc / static_cast<double>(p.size());
}

// Graph-level: same formula built from primitive ops so gradients flow.
inline Tensor weighted_bce_graph(const Tensor& probs, const std::vector<int>& y,
                                 const ClassWeights& w, Tape* tape) {
  Tensor p = probs.rank() == 2 ? probs.reshaped({probs.dim(0)}) : probs;
  if (p.size() != y.size()) throw ShapeError("weighted_bce: length mismatch");
  Tensor y_t = Tensor::zeros({y.size()});
  Tensor w_t = Tensor::zeros({y.size()});
  for (std::size_t i = 0; i < y.size(); ++i) {
    y_t.data()[i] = static_cast<double>(y[i]);
    w_t.data()[i] = y[i] == 1 ? w.w1 : w.w0;
  }
  Tensor clamped = clamp(p, kProbClamp, 1.0 - kProbClamp, tape);
  Tensor pos = mul(y_t, log_op(clamped, tape), tape);
  Tensor one_minus_y = affine(y_t, -1.0, 1.0);
  Tensor neg = mul(one_minus_y, log_op(affine(clamped, -1.0, 1.0, tape), tape), tape);
  Tensor per_sample = mul(w_t, add(pos, neg, tape), tape);
  return affine(mean_all(per_sample, tape), -1.0, 0.0, tape);
}

// ---------------------------------------------------------------------------
// Metrics (threshold 0.5; a tie goes to class 0)
// ---------------------------------------------------------------------------

struct Metrics {
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  double loss = 0.0;  // unweighted BCE
};

inline int predicted_class(double p) { return p > 0.5 ? 1 : 0; }

inline Metrics metrics_from(const std::vector<double>& probs, const std::vector<int>& labels) {
  if (probs.empty() || probs.size() != labels.size())
    throw DataError("metrics need aligned, non-empty predictions");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    int pred = predicted_class(probs[i]);
    if (pred == 1 && labels[i] == 1) ++tp;
    else if (pred == 1 && labels[i] == 0) ++fp;
    else if (pred == 0 && labels[i] == 0) ++tn;
    else ++fn;
  }
  Metrics m;
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(probs.size());
  if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0)
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  m.loss = weighted_bce(probs, labels);
  return m;
}

inline Metrics evaluate(const ClickGuardModel& model,
                        const std::vector<HeadlineRecord>& records,
                        const Lexicons& lex = builtin_lexicons(),
                        const PrecomputedEmbeddings* embeddings = nullptr) {
  if (records.empty()) throw DataError("evaluate: empty record set");
  return metrics_from(predict(model, records, lex, embeddings), labels_of(records));
}

inline void metrics_to_json(const Metrics& m, nlohmann::json& j) {
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision ? nlohmann::json(*m.precision) : nlohmann::json();
  j["recall"] = m.recall ? nlohmann::json(*m.recall) : nlohmann::json();
  j["f1"] = m.f1 ? nlohmann::json(*m.f1) : nlohmann::json();
  j["loss"] = m.loss;
}

// ---------------------------------------------------------------------------
// Training loop: minibatch SGD with the cyclic schedule
// ---------------------------------------------------------------------------

struct EpochStats {
  double train_acc = 0.0, val_acc = 0.0;
  double train_loss = 0.0, val_loss = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::vector<double> lr_per_step;
};

struct TrainHooks {
  std::function<void(const ClickGuardModel&, std::size_t epoch)> on_epoch_end;
};

inline TrainHistory train(ClickGuardModel& model, const DatasetSplit& split,
                          const TrainConfig& cfg,
                          const Lexicons& lex = builtin_lexicons(),
                          const TrainHooks& hooks = {},
                          const PrecomputedEmbeddings* embeddings = nullptr) {
  cfg.validate();
  if (split.train.empty()) throw DataError("train: empty training set");

  // artifacts come from the training portion only
  if (model.config.structural_enabled()) fit_artifacts(model, split.train, lex, cfg.seed);

  TrainHistory history;
  if (cfg.epochs == 0) return history;

  PreparedDataset train_data = prepare_dataset(model, split.train, lex, embeddings);
  PreparedDataset val_data;
  const bool has_val = !split.test.empty();
  if (has_val) val_data = prepare_dataset(model, split.test, lex, embeddings);

  const ClassWeights weights = compute_class_weights(train_data.labels);
  auto params = model.named_parameters();

  std::mt19937_64 batch_rng(cfg.seed);
  std::mt19937_64 dropout_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);

  std::vector<std::size_t> order(split.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t global_step = 0;
  std::mt19937_64 eval_rng(0);  // dropout stream is unused at inference

  auto infer_all = [&](const PreparedDataset& data) {
    std::vector<double> probs;
    probs.reserve(data.count);
    for (std::size_t start = 0; start < data.count; start += 256) {
      std::vector<std::size_t> idx;
      for (std::size_t i = start; i < std::min(data.count, start + 256); ++i)
        idx.push_back(i);
      BatchInputs b = gather_batch(data, model.config, idx);
      Tensor p = forward_batch(model, b, /*training=*/false, eval_rng);
      for (std::size_t i = 0; i < idx.size(); ++i) probs.push_back(p.data()[i]);
    }
    return probs;
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_deterministic(order, batch_rng);
    double epoch_loss = 0.0;
    std::size_t correct = 0;

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(
                                       std::min(order.size(), start + cfg.batch_size)));
      BatchInputs batch = gather_batch(train_data, model.config, idx);
      std::vector<int> batch_labels;
      batch_labels.reserve(idx.size());
      for (std::size_t i : idx) batch_labels.push_back(train_data.labels[i]);

      for (auto& [name, t] : params) t->zero_grad();
      Tape tape;
      Tensor probs = forward_batch(model, batch, /*training=*/true, dropout_rng, &tape);
      Tensor loss = weighted_bce_graph(probs, batch_labels, weights, &tape);
      const double loss_value = loss.item();
      if (!std::isfinite(loss_value))
        throw DivergenceError("training loss diverged at step " +
                                  std::to_string(global_step),
                              global_step);
      epoch_loss += loss_value * static_cast<double>(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i)
        if (predicted_class(probs.data()[i]) == batch_labels[i]) ++correct;

      tape.backward(loss);
      const double lr = lr_at(global_step, cfg);
      history.lr_per_step.push_back(lr);
      for (auto& [name, t] : params)
        for (std::size_t i = 0; i < t->size(); ++i) t->data()[i] -= lr * t->grad()[i];
      ++global_step;
    }

    EpochStats stats;
    stats.train_loss = epoch_loss / static_cast<double>(order.size());
    stats.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());
    if (has_val) {
      auto val_probs = infer_all(val_data);
      stats.val_loss = weighted_bce(val_probs, val_data.labels, weights);
      std::size_t val_correct = 0;
      for (std::size_t i = 0; i < val_probs.size(); ++i)
        if (predicted_class(val_probs[i]) == val_data.labels[i]) ++val_correct;
      stats.val_acc = static_cast<double>(val_correct) / static_cast<double>(val_probs.size());
    }
    history.epochs.push_back(stats);
    if (hooks.on_epoch_end) hooks.on_epoch_end(model, epoch);
  }
  return history;
}

// ---------------------------------------------------------------------------
// Simplified base-rate search: seeded random candidates, log-uniform over
// [1e-7, 1e-3], each scored by validation loss after a short probe run.
// ---------------------------------------------------------------------------

struct LrSearchResult {
  double best_eta_min = 1e-6;
  std::vector<std::pair<double, double>> tried;  // (candidate, val loss)
};

template <typename ModelFactory>
LrSearchResult search_base_lr(ModelFactory&& factory, const DatasetSplit& split,
                              std::size_t budget, TrainConfig probe_template,
                              const Lexicons& lex = builtin_lexicons()) {
  if (budget < 1) throw ConfigError("search budget must be at least 1");

  // probe split: at most 2000 train / 1000 validation records
  DatasetSplit probe = split;
  if (probe.train.size() > 2000) probe.train.resize(2000);
  if (probe.test.size() > 1000) probe.test.resize(1000);

  std::mt19937_64 rng(probe_template.seed);
  LrSearchResult result;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < budget; ++i) {
    double candidate = std::pow(10.0, uniform_range(rng, -7.0, -3.0));
    if (candidate >= probe_template.eta_max) candidate = probe_template.eta_max * 0.5;
    TrainConfig pc = probe_template;
    pc.epochs = 2;
    pc.eta_min = candidate;
    double score = std::numeric_limits<double>::infinity();
    try {
      ClickGuardModel model = factory();
      TrainHistory h = train(model, probe, pc, lex);
      if (!h.epochs.empty() && std::isfinite(h.epochs.back().val_loss))
        score = h.epochs.back().val_loss;
    } catch (const DivergenceError&) {
      // divergent candidates rank last
    }
    result.tried.emplace_back(candidate, score);
    if (score < best_score) {
      best_score = score;
      result.best_eta_min = candidate;
    }
  }
  if (!std::isfinite(best_score)) result.best_eta_min = result.tried.front().first;
  return result;
}

// ---------------------------------------------------------------------------
// History export (Fig. 8-style curves)
// ---------------------------------------------------------------------------

inline std::string history_csv(const TrainHistory& h) {
  std::string out = "epoch,train_acc,val_acc,train_loss,val_loss\n";
  for (std::size_t i = 0; i < h.epochs.size(); ++i) {
    const auto& e = h.epochs[i];
    out += std::to_string(i) + "," + format_double(e.train_acc) + "," +
           format_double(e.val_acc) + "," + format_double(e.train_loss) + "," +
           format_double(e.val_loss) + "\n";
  }
  return out;
}

inline nlohmann::json history_json(const TrainHistory& h) {
  nlohmann::json j;
  j["lr_per_step"] = h.lr_per_step;
  nlohmann::json epochs = nlohmann::json::array();
  for (std::size_t i = 0; i < h.epochs.size(); ++i) {
    const auto& e = h.epochs[i];
    epochs.push_back({{"epoch", i},
                      {"train_acc", e.train_acc},
                      {"val_acc", e.val_acc},
                      {"train_loss", e.train_loss},
                      {"val_loss", e.val_loss}});
  }
  j["epochs"] = epochs;
  return j;
}

}  // namespace clickguard
