#ifndef FOFE_NER_PIPELINE_H_
#define FOFE_NER_PIPELINE_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fofe_ner/text.h"

namespace fofe_ner {

inline constexpr std::string_view kNoneLabel = "NONE";

// Entity class names followed by the reserved NONE class, which is always
// present exactly once and always last.
class LabelSet {
 public:
  explicit LabelSet(std::vector<std::string> entity_classes);

  std::size_t size() const { return names_.size(); }
  std::size_t none() const { return names_.size() - 1; }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::vector<std::string> entity_classes() const {
    return {names_.begin(), names_.end() - 1};
  }
  // Throws InvalidArgument for names not in the set.
  std::size_t index(std::string_view name) const;
  bool contains(std::string_view name) const;

 private:
  std::vector<std::string> names_;
};

struct LabeledFragment {
  Fragment fragment;
  std::size_t label = 0;
};

struct CandidatePrediction {
  Fragment fragment;
  std::vector<double> distribution;
};

struct EntitySpan {
  std::size_t sentence = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;
  double probability = 1.0;

  Fragment fragment() const { return {sentence, start, end}; }
};

// Sentences of one or more documents flattened into a single index space;
// gold spans refer to sentences by that index.
struct Corpus {
  struct Origin {
    std::size_t document = 0;
    std::size_t sentence = 0;  // index within the document
  };
  std::vector<std::string> document_ids;
  std::vector<Sentence> sentences;
  std::vector<Origin> origins;
  std::vector<EntitySpan> gold;
};

// All spans [i, j) with 1 <= j - i <= min(max_len, n_tokens), ordered by
// start, then length.
std::vector<Fragment> enumerate_fragments(std::size_t sentence, std::size_t n_tokens,
                                          std::size_t max_len);

// A fragment matching a gold span exactly takes its class; all others NONE.
// Throws OverlappingGold when gold spans of one sentence overlap.
std::vector<LabeledFragment> label_candidates(std::span<const Fragment> fragments,
                                              std::span<const EntitySpan> gold,
                                              const LabelSet& labels);

// Enumerates and labels every sentence of `corpus`.
std::vector<LabeledFragment> build_candidates(const Corpus& corpus, const LabelSet& labels,
                                              std::size_t max_len);

// Greedy conflict resolution: keep candidates whose best entity probability
// is >= threshold and >= p(NONE), then accept them by descending probability
// (ties: longer span, then smaller start) unless they overlap an accepted
// span. Output is in textual order.
std::vector<EntitySpan> decode_entities(std::span<const CandidatePrediction> predictions,
                                        const LabelSet& labels, double threshold);

struct ClassScores {
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Scores {
  ClassScores overall;
  std::map<std::string, ClassScores> per_class;

  double precision() const { return overall.precision; }
  double recall() const { return overall.recall; }
  double f1() const { return overall.f1; }
};

// Exact-match scoring on (sentence, start, end, class); empty denominators
// give 0.
Scores evaluate(std::span<const EntitySpan> predicted, std::span<const EntitySpan> gold);

}  // namespace fofe_ner

#endif  // FOFE_NER_PIPELINE_H_
