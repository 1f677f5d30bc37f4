#include "fofe_ner/trainer.h"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "fofe_ner/errors.h"

namespace fofe_ner {

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw ConfigError("decay_factor must lie in (0, 1]");
  }
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (!(neg_ratio > 0.0)) throw ConfigError("neg_ratio must be > 0");
  if (!(alpha_word > 0.0 && alpha_word < 1.0)) throw ConfigError("alpha_word must lie in (0, 1)");
  if (!(alpha_char > 0.0 && alpha_char < 1.0)) throw ConfigError("alpha_char must lie in (0, 1)");
}

OptimizerState OptimizerState::zeros_like(std::span<const std::span<double>> params) {
  OptimizerState state;
  for (auto p : params) state.velocity.emplace_back(p.size(), 0.0);
  return state;
}

void sgd_step(std::span<const std::span<double>> params,
              std::span<const std::span<double>> grads, OptimizerState& state,
              double lr, double momentum) {
  if (params.size() != grads.size() || params.size() != state.velocity.size()) {
    throw DimensionMismatch("parameter, gradient and velocity lists differ in length");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto theta = params[t];
    auto g = grads[t];
    auto& v = state.velocity[t];
    if (g.size() != theta.size() || v.size() != theta.size()) {
      throw DimensionMismatch("tensor shapes differ in sgd_step");
    }
    for (std::size_t i = 0; i < theta.size(); ++i) {
      v[i] = momentum * v[i] - lr * g[i];
      theta[i] += v[i];
    }
  }
}

double lr_at(std::size_t epoch, const TrainingConfig& config) {
  if (config.max_epochs <= 1) return config.learning_rate;
  double progress = static_cast<double>(epoch) / static_cast<double>(config.max_epochs - 1);
  return config.learning_rate * std::pow(config.decay_factor, progress);
}

CandidatePool CandidatePool::build(std::span<const LabeledFragment> candidates,
                                   std::size_t none_label) {
  CandidatePool pool;
  for (const auto& c : candidates) {
    (c.label == none_label ? pool.negatives : pool.positives).push_back(c);
  }
  return pool;
}

std::size_t CandidatePool::epoch_size(double neg_ratio) const {
  if (positives.empty()) return negatives.size();
  auto wanted = static_cast<std::size_t>(
      std::llround(neg_ratio * static_cast<double>(positives.size())));
  return positives.size() + std::min(wanted, negatives.size());
}

std::vector<LabeledFragment> sample_batch(const CandidatePool& pool,
                                          const TrainingConfig& config,
                                          std::mt19937_64& rng) {
  if (pool.size() == 0) throw EmptyPool("no training candidates");
  const double positive_share = 1.0 / (1.0 + config.neg_ratio);
  std::bernoulli_distribution pick_positive(positive_share);
  std::vector<LabeledFragment> batch;
  batch.reserve(config.batch_size);
  for (std::size_t i = 0; i < config.batch_size; ++i) {
    bool positive;
    if (pool.negatives.empty()) {
      positive = true;
    } else if (pool.positives.empty()) {
      positive = false;
    } else {
      positive = pick_positive(rng);
    }
    const auto& side = positive ? pool.positives : pool.negatives;
    std::uniform_int_distribution<std::size_t> index(0, side.size() - 1);
    batch.push_back(side[index(rng)]);
  }
  return batch;
}

std::string format_log_header() { return "epoch\tloss\tlr\tdev_p\tdev_r\tdev_f1"; }

std::string format_log_record(const EpochRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%zu\t%.10f\t%.10f\t%.6f\t%.6f\t%.6f", r.epoch, r.loss,
                r.learning_rate, r.precision, r.recall, r.f1);
  return buf;
}

TrainResult train(NerModel& model, std::span<const Sentence> train_sentences,
                  const CandidatePool& pool, const Corpus& dev,
                  const TrainingConfig& config, std::ostream* log) {
  config.validate();
  if (pool.size() == 0) throw EmptyPool("no training candidates");

  std::mt19937_64 rng(config.seed);
  auto params = model.parameters();
  ModelGradients grads = model.zero_gradients();
  auto grad_spans = model.gradients(grads);
  OptimizerState state = OptimizerState::zeros_like(params);

  const std::size_t batches =
      std::max<std::size_t>(1, (pool.epoch_size(config.neg_ratio) + config.batch_size - 1) /
                                   config.batch_size);

  TrainResult result;
  std::vector<std::vector<double>> best;
  double best_f1 = -1.0;
  std::size_t stale = 0;
  if (log) *log << format_log_header() << '\n';

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double lr = lr_at(epoch, config);
    double total = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      auto batch = sample_batch(pool, config, rng);
      double value =
          model.compute_gradients(train_sentences, batch, config.dropout, &rng, grads);
      if (!std::isfinite(value)) {
        throw Diverged("non-finite loss in epoch " + std::to_string(epoch));
      }
      // compute_gradients replaces the network gradient tensors.
      grad_spans = model.gradients(grads);
      sgd_step(params, grad_spans, state, lr, config.momentum);
      total += value;
    }

    auto predicted = model.tag(dev.sentences);
    Scores scores = evaluate(predicted, dev.gold);
    EpochRecord record{epoch, total / static_cast<double>(batches), lr,
                       scores.precision(), scores.recall(), scores.f1()};
    result.log.push_back(record);
    if (log) *log << format_log_record(record) << std::endl;

    if (record.f1 > best_f1) {
      best_f1 = record.f1;
      result.best_epoch = epoch;
      best.clear();
      for (auto p : params) best.emplace_back(p.begin(), p.end());
      stale = 0;
    } else if (++stale > config.patience) {
      break;
    }
  }

  for (std::size_t t = 0; t < params.size(); ++t) {
    std::copy(best[t].begin(), best[t].end(), params[t].begin());
  }
  result.best_f1 = best_f1;
  return result;
}

}  // namespace fofe_ner
