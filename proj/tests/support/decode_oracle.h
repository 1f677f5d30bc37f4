// Exhaustive reference for span decoding on small candidate sets.
#ifndef FOFE_NER_TESTS_DECODE_ORACLE_H_
#define FOFE_NER_TESTS_DECODE_ORACLE_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fofe_ner/pipeline.h"

namespace fofe_ner::oracle {

struct Eligible {
  Fragment fragment;
  std::string label;
  double probability;
};

// Candidates a decoder may output: best entity probability >= threshold and
// >= p(NONE).
inline std::vector<Eligible> eligible(const std::vector<CandidatePrediction>& preds,
                                      const LabelSet& labels, double threshold) {
  std::vector<Eligible> out;
  for (const auto& p : preds) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < labels.none(); ++k) {
      if (p.distribution[k] > p.distribution[best]) best = k;
    }
    double prob = p.distribution[best];
    if (prob >= threshold && prob >= p.distribution[labels.none()]) {
      out.push_back({p.fragment, labels.name(best), prob});
    }
  }
  return out;
}

// Maximum total probability over non-overlapping subsets, by enumeration.
inline double best_total(const std::vector<Eligible>& items) {
  const std::size_t n = items.size();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double total = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1u)) continue;
      for (std::size_t j = i + 1; j < n && ok; ++j) {
        if ((mask >> j & 1u) && items[i].fragment.overlaps(items[j].fragment)) ok = false;
      }
      total += items[i].probability;
    }
    if (ok && total > best) best = total;
  }
  return best;
}

// Up to `max_candidates` distinct spans over one or two short sentences,
// each with a random distribution over `labels`.
inline std::vector<CandidatePrediction> random_candidates(std::mt19937_64& rng,
                                                          const LabelSet& labels,
                                                          std::size_t max_candidates) {
  std::vector<CandidatePrediction> out;
  const std::size_t n = 1 + rng() % max_candidates;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t tries = 0; out.size() < n && tries < 1000; ++tries) {
    std::size_t sentence = rng() % 2;
    std::size_t start = rng() % 8;
    std::size_t end = start + 1 + rng() % 3;
    Fragment f{sentence, start, end};
    bool dup = false;
    for (const auto& c : out) dup = dup || c.fragment == f;
    if (dup) continue;
    std::vector<double> d(labels.size());
    double sum = 0.0;
    for (auto& x : d) {
      // a few large values make confident candidates common
      x = std::pow(u(rng), 0.3 + 3.0 * u(rng));
      sum += x;
    }
    for (auto& x : d) x /= sum;
    out.push_back({f, d});
  }
  return out;
}

}  // namespace fofe_ner::oracle

#endif  // FOFE_NER_TESTS_DECODE_ORACLE_H_
