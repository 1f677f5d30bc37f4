#include "fofe_ner/pipeline.h"

#include <algorithm>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "fofe_ner/errors.h"

namespace fofe_ner {

LabelSet::LabelSet(std::vector<std::string> entity_classes)
    : names_(std::move(entity_classes)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == kNoneLabel) throw InvalidArgument("NONE is reserved");
    if (names_[i].empty()) throw InvalidArgument("empty entity class name");
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw InvalidArgument("duplicate class " + names_[i]);
    }
  }
  names_.emplace_back(kNoneLabel);
}

std::size_t LabelSet::index(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw InvalidArgument("unknown entity class: " + std::string(name));
  }
  return static_cast<std::size_t>(it - names_.begin());
}

bool LabelSet::contains(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::vector<Fragment> enumerate_fragments(std::size_t sentence, std::size_t n_tokens,
                                          std::size_t max_len) {
  if (max_len == 0) throw InvalidArgument("max fragment length must be >= 1");
  std::vector<Fragment> out;
  for (std::size_t start = 0; start < n_tokens; ++start) {
    for (std::size_t len = 1; len <= max_len && start + len <= n_tokens; ++len) {
      out.push_back({sentence, start, start + len});
    }
  }
  return out;
}

namespace {

using SpanKey = std::tuple<std::size_t, std::size_t, std::size_t>;

struct SpanKeyHash {
  std::size_t operator()(const SpanKey& k) const {
    auto [s, a, b] = k;
    return (s * 1000003u + a) * 1000003u + b;
  }
};

void check_gold(std::span<const EntitySpan> gold) {
  std::vector<const EntitySpan*> sorted;
  for (const auto& g : gold) {
    if (g.start >= g.end) throw InvalidArgument("empty gold span");
    sorted.push_back(&g);
  }
  std::sort(sorted.begin(), sorted.end(), [](const EntitySpan* a, const EntitySpan* b) {
    return std::tie(a->sentence, a->start, a->end) < std::tie(b->sentence, b->start, b->end);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->fragment().overlaps(sorted[i - 1]->fragment())) {
      throw OverlappingGold("gold spans overlap in sentence " +
                            std::to_string(sorted[i]->sentence));
    }
  }
}

}  // namespace

std::vector<LabeledFragment> label_candidates(std::span<const Fragment> fragments,
                                              std::span<const EntitySpan> gold,
                                              const LabelSet& labels) {
  check_gold(gold);
  std::unordered_map<SpanKey, std::size_t, SpanKeyHash> by_span;
  for (const auto& g : gold) {
    by_span[{g.sentence, g.start, g.end}] = labels.index(g.label);
  }
  std::vector<LabeledFragment> out;
  out.reserve(fragments.size());
  for (const auto& f : fragments) {
    auto it = by_span.find({f.sentence, f.start, f.end});
    out.push_back({f, it == by_span.end() ? labels.none() : it->second});
  }
  return out;
}

std::vector<LabeledFragment> build_candidates(const Corpus& corpus, const LabelSet& labels,
                                              std::size_t max_len) {
  std::vector<Fragment> fragments;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    auto f = enumerate_fragments(i, corpus.sentences[i].size(), max_len);
    fragments.insert(fragments.end(), f.begin(), f.end());
  }
  return label_candidates(fragments, corpus.gold, labels);
}

std::vector<EntitySpan> decode_entities(std::span<const CandidatePrediction> predictions,
                                        const LabelSet& labels, double threshold) {
  const std::size_t none = labels.none();
  std::vector<EntitySpan> survivors;
  for (const auto& p : predictions) {
    if (p.distribution.size() != labels.size()) {
      throw DimensionMismatch("prediction distribution size differs from label set");
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < none; ++k) {
      if (p.distribution[k] > p.distribution[best]) best = k;
    }
    const double prob = p.distribution[best];
    if (prob < threshold || prob < p.distribution[none]) continue;
    survivors.push_back(
        {p.fragment.sentence, p.fragment.start, p.fragment.end, labels.name(best), prob});
  }
  std::stable_sort(survivors.begin(), survivors.end(),
                   [](const EntitySpan& a, const EntitySpan& b) {
                     if (a.probability != b.probability) return a.probability > b.probability;
                     if (a.end - a.start != b.end - b.start) {
                       return a.end - a.start > b.end - b.start;
                     }
                     return std::tie(a.start, a.sentence) < std::tie(b.start, b.sentence);
                   });
  std::vector<EntitySpan> accepted;
  std::unordered_map<std::size_t, std::vector<bool>> occupied;
  for (auto& span : survivors) {
    auto& used = occupied[span.sentence];
    if (used.size() < span.end) used.resize(span.end, false);
    bool clash = false;
    for (std::size_t t = span.start; t < span.end; ++t) clash = clash || used[t];
    if (clash) continue;
    for (std::size_t t = span.start; t < span.end; ++t) used[t] = true;
    accepted.push_back(std::move(span));
  }
  std::sort(accepted.begin(), accepted.end(), [](const EntitySpan& a, const EntitySpan& b) {
    return std::tie(a.sentence, a.start, a.end) < std::tie(b.sentence, b.start, b.end);
  });
  return accepted;
}

namespace {

// F1 as 2c / (|pred| + |gold|): the harmonic mean of P and R with a single
// rounding.
void finish(ClassScores& s) {
  const auto c = static_cast<double>(s.correct);
  s.precision = s.predicted ? c / static_cast<double>(s.predicted) : 0.0;
  s.recall = s.gold ? c / static_cast<double>(s.gold) : 0.0;
  s.f1 = s.correct ? 2.0 * c / static_cast<double>(s.predicted + s.gold) : 0.0;
}

}  // namespace

Scores evaluate(std::span<const EntitySpan> predicted, std::span<const EntitySpan> gold) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::string>;
  std::map<Key, std::size_t> remaining;
  Scores scores;
  for (const auto& g : gold) {
    ++remaining[{g.sentence, g.start, g.end, g.label}];
    ++scores.per_class[g.label].gold;
  }
  for (const auto& p : predicted) {
    auto& cls = scores.per_class[p.label];
    ++cls.predicted;
    auto it = remaining.find({p.sentence, p.start, p.end, p.label});
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++cls.correct;
    }
  }
  for (auto& [name, cls] : scores.per_class) {
    finish(cls);
    scores.overall.correct += cls.correct;
    scores.overall.predicted += cls.predicted;
    scores.overall.gold += cls.gold;
  }
  finish(scores.overall);
  return scores;
}

}  // namespace fofe_ner
