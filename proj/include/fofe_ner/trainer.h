#ifndef FOFE_NER_TRAINER_H_
#define FOFE_NER_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fofe_ner/model.h"
#include "fofe_ner/pipeline.h"

namespace fofe_ner {

struct TrainingConfig {
  double learning_rate = 0.256;
  double momentum = 0.9;
  std::size_t batch_size = 128;
  double dropout = 0.5;
  // Final-epoch learning rate as a fraction of the initial one.
  double decay_factor = 1.0 / 16.0;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  // Negatives drawn per positive candidate.
  double neg_ratio = 2.0;
  std::uint64_t seed = 1;
  double alpha_word = 0.5;
  double alpha_char = 0.8;

  void validate() const;
};

// Classical momentum buffers, one per parameter tensor.
struct OptimizerState {
  std::vector<std::vector<double>> velocity;

  static OptimizerState zeros_like(std::span<const std::span<double>> params);
};

// v <- momentum * v - lr * g; theta <- theta + v, tensor by tensor.
void sgd_step(std::span<const std::span<double>> params,
              std::span<const std::span<double>> grads, OptimizerState& state,
              double lr, double momentum);

// lr0 * decay^(epoch / (max_epochs - 1)); lr0 when max_epochs == 1.
double lr_at(std::size_t epoch, const TrainingConfig& config);

struct CandidatePool {
  std::vector<LabeledFragment> positives;
  std::vector<LabeledFragment> negatives;

  static CandidatePool build(std::span<const LabeledFragment> candidates,
                             std::size_t none_label);
  std::size_t size() const { return positives.size() + negatives.size(); }
  // Positives plus at most neg_ratio negatives per positive.
  std::size_t epoch_size(double neg_ratio) const;
};

// Draws batch_size candidates; each slot is positive with probability
// 1 / (1 + neg_ratio) unless one side of the pool is empty.
std::vector<LabeledFragment> sample_batch(const CandidatePool& pool,
                                          const TrainingConfig& config,
                                          std::mt19937_64& rng);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double learning_rate = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

std::string format_log_header();
std::string format_log_record(const EpochRecord& record);

struct TrainResult {
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  double best_f1 = 0.0;
};

// Mini-batch SGD with dev-F1 early stopping. On return `model` holds the
// parameters of the best epoch. Each epoch record is written to `log` as soon
// as it is complete. Throws Diverged on a non-finite loss.
TrainResult train(NerModel& model, std::span<const Sentence> train_sentences,
                  const CandidatePool& pool, const Corpus& dev,
                  const TrainingConfig& config, std::ostream* log = nullptr);

}  // namespace fofe_ner

#endif  // FOFE_NER_TRAINER_H_
