#include <algorithm>
#include <random>

#include "decode_oracle.h"
#include "fofe_ner/errors.h"
#include "fofe_ner/pipeline.h"
#include "gtest/gtest.h"
#include "scoring_fixtures.h"

using namespace fofe_ner;

namespace {

const LabelSet kLabels({"PER", "LOC"});

CandidatePrediction cand(std::size_t s, std::size_t a, std::size_t b, double per, double loc) {
  return {{s, a, b}, {per, loc, 1.0 - per - loc}};
}

}  // namespace

TEST(LabelSet, NoneIsLastAndReserved) {
  EXPECT_EQ(kLabels.size(), 3u);
  EXPECT_EQ(kLabels.name(kLabels.none()), kNoneLabel);
  EXPECT_EQ(kLabels.index("LOC"), 1u);
  EXPECT_THROW(kLabels.index("ORG"), InvalidArgument);
  EXPECT_THROW(LabelSet({"PER", "NONE"}), InvalidArgument);
  EXPECT_THROW(LabelSet({"PER", "PER"}), InvalidArgument);
  EXPECT_EQ(kLabels.entity_classes(), (std::vector<std::string>{"PER", "LOC"}));
}

TEST(EnumerateFragments, Examples) {
  EXPECT_EQ(enumerate_fragments(0, 3, 2).size(), 5u);
  auto one = enumerate_fragments(4, 1, 7);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], (Fragment{4, 0, 1}));
  EXPECT_EQ(enumerate_fragments(0, 4, 10).size(), 10u);
  EXPECT_TRUE(enumerate_fragments(0, 0, 3).empty());
}

TEST(EnumerateFragments, CountAndOrder) {
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t k = 1; k <= 9; ++k) {
      auto frags = enumerate_fragments(0, n, k);
      std::size_t expected = 0;
      for (std::size_t len = 1; len <= std::min(k, n); ++len) expected += n - len + 1;
      ASSERT_EQ(frags.size(), expected);
      for (std::size_t i = 1; i < frags.size(); ++i) {
        auto key = [](const Fragment& f) { return std::pair(f.start, f.length()); };
        EXPECT_LT(key(frags[i - 1]), key(frags[i]));
      }
    }
  }
}

TEST(LabelCandidates, Examples) {
  std::vector<EntitySpan> gold{{0, 1, 3, "PER"}};
  std::vector<Fragment> frags{{0, 1, 3}, {0, 1, 2}, {0, 0, 3}};
  auto labeled = label_candidates(frags, gold, kLabels);
  EXPECT_EQ(labeled[0].label, kLabels.index("PER"));
  EXPECT_EQ(labeled[1].label, kLabels.none());
  EXPECT_EQ(labeled[2].label, kLabels.none());
  auto none = label_candidates(frags, {}, kLabels);
  for (const auto& l : none) EXPECT_EQ(l.label, kLabels.none());
}

TEST(LabelCandidates, OverlappingGold) {
  std::vector<EntitySpan> gold{{0, 1, 3, "PER"}, {0, 2, 4, "LOC"}};
  std::vector<Fragment> frags{{0, 1, 3}};
  EXPECT_THROW(label_candidates(frags, gold, kLabels), OverlappingGold);
  std::vector<EntitySpan> other_sentences{{0, 1, 3, "PER"}, {1, 2, 4, "LOC"}};
  EXPECT_NO_THROW(label_candidates(frags, other_sentences, kLabels));
}

TEST(Decode, Examples) {
  std::vector<CandidatePrediction> single{cand(0, 0, 1, 0.9, 0.05)};
  auto out = decode_entities(single, kLabels, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].label, "PER");
  EXPECT_DOUBLE_EQ(out[0].probability, 0.9);

  std::vector<CandidatePrediction> overlap{cand(0, 1, 3, 0.7, 0.1), cand(0, 0, 2, 0.8, 0.1)};
  out = decode_entities(overlap, kLabels, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].fragment(), (Fragment{0, 0, 2}));

  std::vector<CandidatePrediction> none_wins{{{0, 0, 1}, {0.4, 0.0, 0.6}}};
  EXPECT_TRUE(decode_entities(none_wins, kLabels, 0.3).empty());
}

TEST(Decode, ThresholdAndTies) {
  std::vector<CandidatePrediction> c{{{0, 0, 1}, {0.45, 0.15, 0.40}}};
  EXPECT_TRUE(decode_entities(c, kLabels, 0.5).empty());
  EXPECT_EQ(decode_entities(c, kLabels, 0.45).size(), 1u);

  // equal probability: the longer span wins
  std::vector<CandidatePrediction> tie{cand(0, 0, 1, 0.6, 0.1), cand(0, 0, 2, 0.6, 0.1)};
  auto out = decode_entities(tie, kLabels, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].end, 2u);
  // equal probability and length: the earlier start wins
  std::vector<CandidatePrediction> tie2{cand(0, 1, 3, 0.6, 0.1), cand(0, 0, 2, 0.6, 0.1)};
  out = decode_entities(tie2, kLabels, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].start, 0u);
}

TEST(Decode, TextualOrderAndSentenceIndependence) {
  std::vector<CandidatePrediction> c{cand(1, 0, 2, 0.9, 0.0), cand(0, 3, 4, 0.1, 0.8),
                                     cand(0, 0, 2, 0.7, 0.0)};
  auto out = decode_entities(c, kLabels, 0.5);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].fragment(), (Fragment{0, 0, 2}));
  EXPECT_EQ(out[1].fragment(), (Fragment{0, 3, 4}));
  EXPECT_EQ(out[1].label, "LOC");
  EXPECT_EQ(out[2].fragment(), (Fragment{1, 0, 2}));
}

TEST(Decode, StructuralPropertiesAgainstBruteForce) {
  std::mt19937_64 rng(77);
  LabelSet labels({"PER", "LOC", "ORG"});
  for (int trial = 0; trial < 300; ++trial) {
    auto preds = oracle::random_candidates(rng, labels, 12);
    const double threshold = 0.3;
    auto out = decode_entities(preds, labels, threshold);
    auto elig = oracle::eligible(preds, labels, threshold);
    double total = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_GE(out[i].probability, threshold);
      EXPECT_NE(out[i].label, kNoneLabel);
      for (std::size_t j = i + 1; j < out.size(); ++j) {
        EXPECT_FALSE(out[i].fragment().overlaps(out[j].fragment()));
      }
      auto it = std::find_if(elig.begin(), elig.end(), [&](const oracle::Eligible& e) {
        return e.fragment == out[i].fragment() && e.label == out[i].label;
      });
      EXPECT_NE(it, elig.end());
      total += out[i].probability;
    }
    // greedy is maximal: every eligible span left out clashes with an output
    for (const auto& e : elig) {
      bool taken = false, clash = false;
      for (const auto& o : out) {
        taken = taken || o.fragment() == e.fragment;
        clash = clash || o.fragment().overlaps(e.fragment);
      }
      EXPECT_TRUE(taken || clash);
    }
    EXPECT_LE(total, oracle::best_total(elig) + 1e-12);
  }
}

TEST(Decode, GoldRoundTrip) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + rng() % 12;
    std::vector<EntitySpan> gold;
    for (std::size_t t = 0; t < n;) {
      std::size_t len = 1 + rng() % 3;
      if (t + len <= n && rng() % 2) {
        gold.push_back({0, t, t + len, rng() % 2 ? "PER" : "LOC", 1.0});
        t += len;
      } else {
        ++t;
      }
    }
    for (std::size_t max_len : {3u, 5u}) {
      auto frags = enumerate_fragments(0, n, max_len);
      auto labeled = label_candidates(frags, gold, kLabels);
      std::vector<CandidatePrediction> preds;
      for (const auto& l : labeled) {
        std::vector<double> d(kLabels.size(), 0.0);
        d[l.label] = 1.0;
        preds.push_back({l.fragment, d});
      }
      auto out = decode_entities(preds, kLabels, 0.5);
      ASSERT_EQ(out.size(), gold.size());
      for (std::size_t i = 0; i < gold.size(); ++i) {
        EXPECT_EQ(out[i].fragment(), gold[i].fragment());
        EXPECT_EQ(out[i].label, gold[i].label);
      }
    }
  }
}

TEST(Evaluate, HandCountedFixtures) {
  for (const auto& f : fixtures::scoring_fixtures()) {
    auto s = evaluate(f.predicted, f.gold);
    EXPECT_EQ(s.precision(), f.precision) << f.name;
    EXPECT_EQ(s.recall(), f.recall) << f.name;
    EXPECT_EQ(s.f1(), f.f1) << f.name;
  }
}

TEST(Evaluate, PerClassBreakdown) {
  std::vector<EntitySpan> pred{{0, 0, 1, "PER"}, {0, 2, 3, "PER"}, {0, 4, 5, "LOC"},
                               {1, 0, 1, "LOC"}};
  std::vector<EntitySpan> gold{{0, 0, 1, "PER"}, {0, 2, 3, "PER"}, {0, 4, 6, "LOC"},
                               {1, 0, 1, "LOC"}, {1, 3, 4, "ORG"}};
  auto s = evaluate(pred, gold);
  EXPECT_EQ(s.overall.correct, 3u);
  EXPECT_EQ(s.precision(), 0.75);
  EXPECT_EQ(s.recall(), 0.6);
  EXPECT_EQ(s.f1(), 2.0 / 3.0);
  EXPECT_EQ(s.per_class.at("PER").f1, 1.0);
  EXPECT_EQ(s.per_class.at("LOC").precision, 0.5);
  EXPECT_EQ(s.per_class.at("ORG").predicted, 0u);
  EXPECT_EQ(s.per_class.at("ORG").precision, 0.0);
  EXPECT_EQ(s.per_class.at("ORG").recall, 0.0);
}

TEST(Evaluate, PermutationInvarianceAndHarmonicBound) {
  std::mt19937_64 rng(8);
  const char* names[] = {"PER", "LOC"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EntitySpan> pred, gold;
    for (int i = 0; i < 6; ++i) {
      gold.push_back({rng() % 3, rng() % 4, 4 + rng() % 3, names[rng() % 2]});
      pred.push_back({rng() % 3, rng() % 4, 4 + rng() % 3, names[rng() % 2]});
    }
    auto a = evaluate(pred, gold);
    std::shuffle(pred.begin(), pred.end(), rng);
    std::shuffle(gold.begin(), gold.end(), rng);
    auto b = evaluate(pred, gold);
    EXPECT_EQ(a.f1(), b.f1());
    EXPECT_EQ(a.precision(), b.precision());
    double p = a.precision(), r = a.recall();
    double lo = std::min(p, r), hi = std::max(p, r);
    if (lo + hi > 0) {
      EXPECT_NEAR(a.f1(), 2 * p * r / (p + r), 1e-15);
      EXPECT_LE(a.f1(), 2 * lo / (lo + hi) + 1e-15);
    } else {
      EXPECT_EQ(a.f1(), 0.0);
    }
  }
}
