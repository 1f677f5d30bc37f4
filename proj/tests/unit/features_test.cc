#include <cmath>
#include <random>

#include "fofe_ner/errors.h"
#include "fofe_ner/features.h"
#include "fofe_ner/pipeline.h"
#include "gtest/gtest.h"

using namespace fofe_ner;

namespace {

EmbeddingMatrix identity(std::vector<std::string> tokens) {
  auto vocab = std::make_shared<const Vocabulary>(std::move(tokens));
  EmbeddingMatrix m(vocab, vocab->size());
  for (std::size_t i = 0; i < vocab->size(); ++i) m.row(i)[i] = 1.0;
  return m;
}

CharConvConfig small_conv(std::size_t dim) {
  CharConvConfig c;
  c.widths = {2, 3};
  c.filters_per_width = 3;
  c.char_embed_dim = dim;
  return c;
}

FeatureExtractor random_extractor(std::uint64_t seed, std::size_t word_dim = 4,
                                  std::size_t char_dim = 3) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> words{"the", "The", "cat", "sat", "on", "mat", "New", "York"};
  auto cased = EmbeddingMatrix::random(std::make_shared<const Vocabulary>(words), word_dim, rng);
  std::vector<std::string> lower{"the", "cat", "sat", "on", "mat", "new", "york"};
  auto uncased =
      EmbeddingMatrix::random(std::make_shared<const Vocabulary>(lower), word_dim, rng);
  // Larger than the default init scale so ReLUs in the conv are active.
  for (double& v : cased.data()) v *= 20;
  for (double& v : uncased.data()) v *= 20;
  auto chars = EmbeddingMatrix::random(make_char_vocabulary({}), char_dim, rng);
  for (double& v : chars.data()) v *= 20;
  auto conv = CharConvFilters::glorot(small_conv(char_dim), rng);
  for (auto& b : conv.biases) {
    for (double& v : b) v = 0.1;
  }
  return FeatureExtractor(std::move(cased), std::move(uncased), std::move(chars),
                          std::move(conv), ForgettingFactor(0.5), ForgettingFactor(0.8));
}

std::vector<double> slice_of(const std::vector<NamedSlice>& slices, const std::string& name) {
  for (const auto& s : slices) {
    if (s.name == name) return s.values;
  }
  ADD_FAILURE() << "missing slice " << name;
  return {};
}

}  // namespace

TEST(FragmentFeatures, CharFofeExamples) {
  auto chars = identity({"A", "B"});
  auto words = identity({"A", "AB"});
  CharConvConfig cfg = small_conv(chars.dim());
  auto conv = CharConvFilters::zeros(cfg);
  ForgettingFactor ac(0.8);

  Sentence one({"A"});
  auto f1 = fragment_features(one, {0, 0, 1}, words, words, chars, conv, ac);
  EXPECT_EQ(slice_of(f1, "char_fofe_l2r"), (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(slice_of(f1, "char_fofe_r2l"), (std::vector<double>{1, 0, 0}));

  Sentence two({"AB"});
  auto f2 = fragment_features(two, {0, 0, 1}, words, words, chars, conv, ac);
  auto l2r = slice_of(f2, "char_fofe_l2r");
  auto r2l = slice_of(f2, "char_fofe_r2l");
  EXPECT_DOUBLE_EQ(l2r[0], 0.8);
  EXPECT_DOUBLE_EQ(l2r[1], 1.0);
  EXPECT_DOUBLE_EQ(r2l[0], 1.0);
  EXPECT_DOUBLE_EQ(r2l[1], 0.8);
}

TEST(FragmentFeatures, BagOfWordsIsSumOfOneHots) {
  auto words = identity({"New", "York", "City"});
  auto chars = identity({"N"});
  auto conv = CharConvFilters::zeros(small_conv(chars.dim()));
  Sentence s({"New", "York"});
  auto f = fragment_features(s, {0, 0, 2}, words, words, chars, conv, ForgettingFactor(0.8));
  EXPECT_EQ(slice_of(f, "bow_cased"), (std::vector<double>{1, 1, 0, 0}));
  Sentence rep({"York", "York"});
  auto g = fragment_features(rep, {0, 0, 2}, words, words, chars, conv, ForgettingFactor(0.8));
  EXPECT_EQ(slice_of(g, "bow_cased"), (std::vector<double>{0, 2, 0, 0}));
}

TEST(FragmentFeatures, DeclaredOrder) {
  auto words = identity({"a"});
  auto chars = identity({"a"});
  auto conv = CharConvFilters::zeros(small_conv(chars.dim()));
  Sentence s({"a"});
  auto f = fragment_features(s, {0, 0, 1}, words, words, chars, conv, ForgettingFactor(0.8));
  std::vector<std::string> names;
  for (const auto& x : f) names.push_back(x.name);
  EXPECT_EQ(names, (std::vector<std::string>{"bow_cased", "bow_uncased", "char_fofe_l2r",
                                             "char_fofe_r2l", "char_conv"}));
}

TEST(FragmentFeatures, ShortFragmentWithoutPadding) {
  auto words = identity({"a"});
  auto chars = identity({"a"});
  auto cfg = small_conv(chars.dim());
  cfg.pad = false;
  auto conv = CharConvFilters::zeros(cfg);
  Sentence s({"a"});
  EXPECT_THROW(
      fragment_features(s, {0, 0, 1}, words, words, chars, conv, ForgettingFactor(0.8)),
      FragmentTooShort);
  Sentence longer({"abc"});
  EXPECT_NO_THROW(
      fragment_features(longer, {0, 0, 1}, words, words, chars, conv, ForgettingFactor(0.8)));
}

TEST(ContextFeatures, Examples) {
  auto words = identity({"a", "b", "c"});
  ForgettingFactor aw(0.5);
  Sentence s({"a", "b", "c"});
  auto ctx = context_features(s, {0, 1, 2}, words, words, aw);
  std::vector<std::string> names;
  for (const auto& x : ctx) names.push_back(x.name);
  EXPECT_EQ(names, (std::vector<std::string>{
                       "left_excl_cased", "left_excl_uncased", "left_incl_cased",
                       "left_incl_uncased", "right_excl_cased", "right_excl_uncased",
                       "right_incl_cased", "right_incl_uncased"}));
  Vocabulary vocab({"a", "b", "c"});
  std::vector<std::string> ab{"a", "b"}, bc{"b", "c"};
  EXPECT_EQ(slice_of(ctx, "left_incl_cased"), encode(ab, vocab, aw).values);
  EXPECT_EQ(slice_of(ctx, "right_incl_cased"), encode_reversed(bc, vocab, aw).values);
  EXPECT_EQ(slice_of(ctx, "left_excl_cased"), (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(slice_of(ctx, "right_excl_cased"), (std::vector<double>{0, 0, 1, 0}));

  auto whole = context_features(s, {0, 0, 3}, words, words, aw);
  EXPECT_EQ(slice_of(whole, "left_excl_cased"), (std::vector<double>(4, 0.0)));
  EXPECT_EQ(slice_of(whole, "right_excl_uncased"), (std::vector<double>(4, 0.0)));
}

TEST(ContextFeatures, CasedEqualsUncasedForLowercaseText) {
  auto cased = identity({"x", "y"});
  auto uncased = identity({"x", "y"});
  Sentence s({"x", "y", "x"});
  auto ctx = context_features(s, {0, 1, 2}, cased, uncased, ForgettingFactor(0.5));
  for (const char* part : {"left_excl", "left_incl", "right_excl", "right_incl"}) {
    EXPECT_EQ(slice_of(ctx, std::string(part) + "_cased"),
              slice_of(ctx, std::string(part) + "_uncased"));
  }
}

TEST(ContextFeatures, ExcludingSlicesIgnoreFragmentTokens) {
  auto fx = random_extractor(3);
  Sentence a({"the", "cat", "sat", "on", "the", "mat"});
  Sentence b({"the", "York", "New", "on", "the", "mat"});
  Fragment f{0, 1, 3};
  auto x = fx.extract(a, f);
  auto y = fx.extract(b, f);
  for (const char* name : {"left_excl_cased", "left_excl_uncased", "right_excl_cased",
                           "right_excl_uncased"}) {
    auto xs = x.slice(name), ys = y.slice(name);
    EXPECT_TRUE(std::equal(xs.begin(), xs.end(), ys.begin())) << name;
  }
  auto xi = x.slice("left_incl_cased"), yi = y.slice("left_incl_cased");
  EXPECT_FALSE(std::equal(xi.begin(), xi.end(), yi.begin()));
}

TEST(CharConv, Examples) {
  auto chars = identity({"a", "b", "c"});  // 4 rows incl. unknown, dim 4
  CharConvConfig cfg;
  cfg.widths = {1};
  cfg.filters_per_width = 1;
  cfg.char_embed_dim = 4;
  auto filters = CharConvFilters::zeros(cfg);
  EXPECT_EQ(char_conv("abc", chars, filters), (std::vector<double>{0}));

  // width-1 all-ones filter: per-character sum of the embedding, max over chars
  filters.weights[0] = {1, 1, 1, 1};
  auto scaled = chars;
  scaled.row(0)[0] = 0.3;
  scaled.row(1)[1] = 0.9;
  scaled.row(2)[2] = 0.5;
  EXPECT_DOUBLE_EQ(char_conv("abc", scaled, filters)[0], 0.9);

  // 2-char string, one width-2 filter: a single window
  cfg.widths = {2};
  auto two = CharConvFilters::zeros(cfg);
  two.weights[0] = {0.5, -1, 2, 0, 3, 0.25, 1, 0};  // position 0 then position 1
  two.biases[0] = {0.1};
  // window "ba": 0.5*e_b[.] ... -> w0·e_b + w1·e_a + b = -1 + 3 + 0.1
  EXPECT_DOUBLE_EQ(char_conv("ba", chars, two)[0], 2.1);
  // negative window clipped by the ReLU
  two.biases[0] = {-5};
  EXPECT_EQ(char_conv("ba", chars, two)[0], 0.0);
}

TEST(CharConv, OutputLengthAndPadding) {
  auto chars = EmbeddingMatrix(make_char_vocabulary({}), 3);
  CharConvConfig cfg;
  cfg.widths = {2, 4};
  cfg.filters_per_width = 5;
  cfg.char_embed_dim = 3;
  std::mt19937_64 rng(1);
  auto f = CharConvFilters::glorot(cfg, rng);
  CharConvTrace trace;
  EXPECT_EQ(char_conv("a", chars, f, &trace).size(), 10u);
  ASSERT_EQ(trace.char_ids.size(), 4u);
  EXPECT_EQ(trace.char_ids[3], chars.vocab().lookup(kPaddingToken));
  cfg.pad = false;
  auto g = CharConvFilters::glorot(cfg, rng);
  EXPECT_THROW(char_conv("abc", chars, g), FragmentTooShort);
}

TEST(CharConvConfig, Validation) {
  CharConvConfig c;
  c.widths = {};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.widths = {0};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.widths = {2};
  c.filters_per_width = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(CharConv, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  auto chars = EmbeddingMatrix::random(make_char_vocabulary({}), 3, rng);
  for (double& v : chars.data()) v *= 40;
  auto filters = CharConvFilters::glorot(small_conv(3), rng);
  std::vector<double> c(filters.output_dim());
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& x : c) x = u(rng);
  const std::string text = "Kabul";

  CharConvTrace trace;
  char_conv(text, chars, filters, &trace);
  std::vector<double> d_chars(chars.data().size(), 0.0);
  auto d_filters = CharConvFilters::zeros(filters.config);
  char_conv_backward(trace, c, chars, filters, d_chars, d_filters);

  auto loss = [&](CharConvTrace* t) {
    auto out = char_conv(text, chars, filters, t);
    double l = 0;
    for (std::size_t i = 0; i < out.size(); ++i) l += c[i] * out[i];
    return l;
  };
  const double h = 1e-4;
  std::size_t checked = 0, skipped = 0;
  auto check = [&](double& param, double analytic) {
    double saved = param;
    CharConvTrace tu, td;
    param = saved + h;
    double up = loss(&tu);
    param = saved - h;
    double down = loss(&td);
    param = saved;
    if (tu.argmax != trace.argmax || td.argmax != trace.argmax) {
      ++skipped;  // pooling winner or ReLU state changed inside the step
      return;
    }
    double numeric = (up - down) / (2 * h);
    double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    EXPECT_LT(std::abs(analytic - numeric) / denom, 1e-4);
    ++checked;
  };
  for (std::size_t k = 0; k < filters.weights.size(); ++k) {
    for (std::size_t i = 0; i < filters.weights[k].size(); ++i) {
      check(filters.weights[k][i], d_filters.weights[k][i]);
    }
    for (std::size_t i = 0; i < filters.biases[k].size(); ++i) {
      check(filters.biases[k][i], d_filters.biases[k][i]);
    }
  }
  for (std::size_t i = 0; i < chars.data().size(); ++i) check(chars.data()[i], d_chars[i]);
  EXPECT_GT(checked, 100u);
  EXPECT_LT(skipped, checked / 20 + 1);
}

TEST(FeatureExtractor, SlicesCoverGroupsExactly) {
  auto fx = random_extractor(1);
  const auto& layout = *fx.layout();
  std::size_t frag = 0, ctx = 0;
  for (const auto& s : layout.slices) {
    auto& cursor = s.group == FeatureGroup::kFragment ? frag : ctx;
    EXPECT_EQ(s.offset, cursor) << s.name;
    cursor += s.length;
  }
  EXPECT_EQ(frag, layout.fragment_dim);
  EXPECT_EQ(ctx, layout.context_dim);

  Sentence s({"The", "cat", "sat"});
  auto bundle = fx.extract(s, {0, 1, 3});
  EXPECT_EQ(bundle.fragment_group.size(), fx.fragment_dim());
  EXPECT_EQ(bundle.context_group.size(), fx.context_dim());
  auto frag_slices = fragment_features(s, {0, 1, 3}, fx.word_cased(), fx.word_uncased(),
                                       fx.chars(), fx.conv(), fx.alpha_char());
  std::vector<double> rebuilt;
  for (const auto& x : frag_slices) rebuilt.insert(rebuilt.end(), x.values.begin(), x.values.end());
  EXPECT_EQ(rebuilt, bundle.fragment_group);
}

TEST(FeatureExtractor, DeterministicAndExtractAllMatches) {
  auto fx = random_extractor(2);
  Sentence s({"The", "cat", "sat", "on", "the", "mat", "in", "New", "York"});
  auto fragments = enumerate_fragments(0, s.size(), 4);
  auto all = fx.extract_all(s, fragments);
  ASSERT_EQ(all.size(), fragments.size());
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    auto one = fx.extract(s, fragments[i]);
    auto again = fx.extract(s, fragments[i]);
    EXPECT_EQ(one.fragment_group, again.fragment_group);
    EXPECT_EQ(one.context_group, again.context_group);
    EXPECT_EQ(all[i].fragment_group, one.fragment_group);
    ASSERT_EQ(all[i].context_group.size(), one.context_group.size());
    for (std::size_t d = 0; d < one.context_group.size(); ++d) {
      EXPECT_NEAR(all[i].context_group[d], one.context_group[d], 1e-12);
    }
  }
}

TEST(FeatureExtractor, BackwardMatchesFiniteDifferences) {
  auto fx = random_extractor(5, 3, 2);
  Sentence s({"The", "cat", "sat", "on", "the", "mat"});
  Fragment f{0, 1, 3};
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> cf(fx.fragment_dim()), cc(fx.context_dim());
  for (auto& x : cf) x = u(rng);
  for (auto& x : cc) x = u(rng);
  auto loss = [&](FeatureTrace* t) {
    auto b = fx.extract(s, f, t);
    double l = 0;
    for (std::size_t i = 0; i < cf.size(); ++i) l += cf[i] * b.fragment_group[i];
    for (std::size_t i = 0; i < cc.size(); ++i) l += cc[i] * b.context_group[i];
    return l;
  };
  FeatureTrace trace;
  loss(&trace);
  auto grads = fx.zero_gradients();
  fx.backward(trace, cf, cc, grads);
  auto params = fx.parameters();
  auto gspans = fx.gradients(grads);
  ASSERT_EQ(params.size(), gspans.size());
  const double h = 1e-4;
  std::size_t checked = 0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    ASSERT_EQ(params[p].size(), gspans[p].size());
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      double saved = params[p][i];
      FeatureTrace tu, td;
      params[p][i] = saved + h;
      double up = loss(&tu);
      params[p][i] = saved - h;
      double down = loss(&td);
      params[p][i] = saved;
      if (tu.conv.argmax != trace.conv.argmax || td.conv.argmax != trace.conv.argmax) continue;
      double numeric = (up - down) / (2 * h);
      double analytic = gspans[p][i];
      double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      EXPECT_LT(std::abs(analytic - numeric) / denom, 1e-4) << "tensor " << p << " index " << i;
      ++checked;
    }
  }
  EXPECT_GT(checked, 200u);
}

TEST(FeatureExtractor, FrozenMatricesReceiveNoGradient) {
  auto fx = random_extractor(7);
  const std::size_t before = fx.parameters().size();
  fx.word_cased().set_trainable(false);
  EXPECT_EQ(fx.parameters().size(), before - 1);
  auto grads = fx.zero_gradients();
  EXPECT_TRUE(grads.word_cased.empty());
  EXPECT_EQ(fx.gradients(grads).size(), before - 1);
}
