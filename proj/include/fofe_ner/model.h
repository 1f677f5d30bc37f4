#ifndef FOFE_NER_MODEL_H_
#define FOFE_NER_MODEL_H_

#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fofe_ner/features.h"
#include "fofe_ner/network.h"
#include "fofe_ner/pipeline.h"

namespace fofe_ner {

enum class Tokenization { kWord, kCharacter };

struct ModelSettings {
  std::size_t max_fragment_len = 7;
  double threshold = 0.5;
  Tokenization tokenization = Tokenization::kWord;
};

struct ModelGradients {
  FeatureGradients features;
  GroupedNetwork network;

  void zero();
};

// Feature extractor, grouped network and label set bundled for training and
// tagging.
class NerModel {
 public:
  NerModel(FeatureExtractor features, GroupedNetwork network, LabelSet labels,
           ModelSettings settings);

  const FeatureExtractor& features() const { return features_; }
  FeatureExtractor& features() { return features_; }
  const GroupedNetwork& network() const { return network_; }
  GroupedNetwork& network() { return network_; }
  const LabelSet& labels() const { return labels_; }
  const ModelSettings& settings() const { return settings_; }
  ModelSettings& settings() { return settings_; }

  // Class distributions for every enumerated fragment of one sentence.
  std::vector<CandidatePrediction> predict(const Sentence& sentence,
                                           std::size_t sentence_index) const;
  // Predicts and decodes each sentence; span sentence indices follow `sentences`.
  std::vector<EntitySpan> tag(std::span<const Sentence> sentences) const;

  // Forward + backward over one mini-batch; returns the mean loss and leaves
  // the parameter gradients in `grads` (overwritten, not accumulated).
  double compute_gradients(std::span<const Sentence> sentences,
                           std::span<const LabeledFragment> batch, double dropout,
                           std::mt19937_64* rng, ModelGradients& grads) const;

  ModelGradients zero_gradients() const;

  // Feature tensors first, then network tensors.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<double>> gradients(ModelGradients& grads) const;

  // Binary container; layout documented in docs/model_format.md.
  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static NerModel load(std::istream& in);
  static NerModel load(const std::string& path);

 private:
  static NerModel load_unchecked(std::istream& in);

  FeatureExtractor features_;
  GroupedNetwork network_;
  LabelSet labels_;
  ModelSettings settings_;
};

}  // namespace fofe_ner

#endif  // FOFE_NER_MODEL_H_
