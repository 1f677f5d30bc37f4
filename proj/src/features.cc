#include "fofe_ner/features.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "fofe_ner/errors.h"

namespace fofe_ner {

std::size_t CharConvConfig::max_width() const {
  return widths.empty() ? 0 : *std::max_element(widths.begin(), widths.end());
}

void CharConvConfig::validate() const {
  if (widths.empty()) throw InvalidArgument("char conv needs at least one width");
  for (std::size_t w : widths) {
    if (w == 0) throw InvalidArgument("char conv widths must be >= 1");
  }
  if (filters_per_width == 0) throw InvalidArgument("char conv needs >= 1 filter");
  if (char_embed_dim == 0) throw InvalidArgument("char embedding dim must be > 0");
}

CharConvFilters CharConvFilters::zeros(const CharConvConfig& config) {
  config.validate();
  CharConvFilters f{config, {}, {}};
  for (std::size_t w : config.widths) {
    f.weights.emplace_back(config.filters_per_width * w * config.char_embed_dim, 0.0);
    f.biases.emplace_back(config.filters_per_width, 0.0);
  }
  return f;
}

CharConvFilters CharConvFilters::glorot(const CharConvConfig& config,
                                        std::mt19937_64& rng) {
  auto f = zeros(config);
  for (std::size_t k = 0; k < config.widths.size(); ++k) {
    double fan_in = static_cast<double>(config.widths[k] * config.char_embed_dim);
    double fan_out = static_cast<double>(config.filters_per_width);
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : f.weights[k]) w = dist(rng);
  }
  return f;
}

std::shared_ptr<const Vocabulary> make_char_vocabulary(
    const std::vector<std::string>& extra_characters) {
  std::vector<std::string> chars;
  std::unordered_set<std::string> seen;
  auto add = [&](std::string c) {
    if (seen.insert(c).second) chars.push_back(std::move(c));
  };
  for (char c = 0x20; c < 0x7F; ++c) add(std::string(1, c));
  for (const auto& c : extra_characters) add(c);
  add(std::string(kPaddingToken));
  return std::make_shared<const Vocabulary>(std::move(chars));
}

std::vector<std::size_t> char_ids(const std::string& surface, const Vocabulary& chars) {
  auto pieces = utf8_characters(surface);
  return chars.lookup(pieces);
}

std::vector<double> char_conv(std::span<const std::size_t> ids,
                              const EmbeddingMatrix& char_embed,
                              const CharConvFilters& filters, CharConvTrace* trace) {
  const auto& cfg = filters.config;
  const std::size_t dim = char_embed.dim();
  if (dim != cfg.char_embed_dim) {
    throw DimensionMismatch("char embedding dim differs from conv config");
  }
  std::vector<std::size_t> padded(ids.begin(), ids.end());
  if (padded.size() < cfg.max_width()) {
    if (!cfg.pad) {
      throw FragmentTooShort("character string of length " +
                             std::to_string(padded.size()) +
                             " shorter than filter width " +
                             std::to_string(cfg.max_width()));
    }
    padded.resize(cfg.max_width(), char_embed.vocab().lookup(kPaddingToken));
  }
  if (padded.empty()) throw FragmentTooShort("empty character string");
  for (std::size_t id : padded) {
    if (id >= char_embed.rows()) throw DimensionMismatch("char id outside matrix");
  }

  std::vector<double> out(cfg.output_dim(), 0.0);
  std::vector<long> argmax(cfg.output_dim(), -1);
  std::size_t unit = 0;
  for (std::size_t k = 0; k < cfg.widths.size(); ++k) {
    const std::size_t width = cfg.widths[k];
    const std::size_t windows = padded.size() - width + 1;
    for (std::size_t f = 0; f < cfg.filters_per_width; ++f, ++unit) {
      const double* w = filters.weights[k].data() + f * width * dim;
      double best = 0.0;
      long best_pos = -1;
      for (std::size_t t = 0; t < windows; ++t) {
        double pre = filters.biases[k][f];
        for (std::size_t p = 0; p < width; ++p) {
          auto row = char_embed.row(padded[t + p]);
          const double* wp = w + p * dim;
          for (std::size_t d = 0; d < dim; ++d) pre += wp[d] * row[d];
        }
        if (best_pos < 0 || pre > best) {
          best = pre;
          best_pos = static_cast<long>(t);
        }
      }
      if (best > 0.0) {
        out[unit] = best;
        argmax[unit] = best_pos;
      }
    }
  }
  if (trace) {
    trace->char_ids = std::move(padded);
    trace->argmax = std::move(argmax);
  }
  return out;
}

std::vector<double> char_conv(const std::string& surface,
                              const EmbeddingMatrix& char_embed,
                              const CharConvFilters& filters, CharConvTrace* trace) {
  auto ids = char_ids(surface, char_embed.vocab());
  return char_conv(ids, char_embed, filters, trace);
}

void char_conv_backward(const CharConvTrace& trace, std::span<const double> d_out,
                        const EmbeddingMatrix& char_embed,
                        const CharConvFilters& filters, std::span<double> d_char_embed,
                        CharConvFilters& d_filters) {
  const auto& cfg = filters.config;
  const std::size_t dim = char_embed.dim();
  std::size_t unit = 0;
  for (std::size_t k = 0; k < cfg.widths.size(); ++k) {
    const std::size_t width = cfg.widths[k];
    for (std::size_t f = 0; f < cfg.filters_per_width; ++f, ++unit) {
      if (trace.argmax[unit] < 0) continue;
      const double g = d_out[unit];
      const auto t = static_cast<std::size_t>(trace.argmax[unit]);
      const double* w = filters.weights[k].data() + f * width * dim;
      double* dw = d_filters.weights[k].data() + f * width * dim;
      d_filters.biases[k][f] += g;
      for (std::size_t p = 0; p < width; ++p) {
        const std::size_t id = trace.char_ids[t + p];
        auto row = char_embed.row(id);
        double* drow = d_char_embed.empty() ? nullptr : d_char_embed.data() + id * dim;
        for (std::size_t d = 0; d < dim; ++d) {
          dw[p * dim + d] += g * row[d];
          if (drow) drow[d] += g * w[p * dim + d];
        }
      }
    }
  }
}

namespace {

void emit(std::vector<NamedSlice>& out, std::string name, const SparseCode& code,
          const EmbeddingMatrix& matrix, MatrixId id, FeatureGroup group,
          std::size_t& offset, FeatureTrace* trace) {
  NamedSlice slice{std::move(name), std::vector<double>(matrix.dim())};
  project_into(code, matrix, slice.values);
  if (trace) trace->projections.push_back({code, id, group, offset});
  offset += matrix.dim();
  out.push_back(std::move(slice));
}

}  // namespace

std::vector<NamedSlice> fragment_features(const Sentence& sentence,
                                          const Fragment& fragment,
                                          const EmbeddingMatrix& word_cased,
                                          const EmbeddingMatrix& word_uncased,
                                          const EmbeddingMatrix& char_embed,
                                          const CharConvFilters& conv,
                                          ForgettingFactor alpha_char,
                                          FeatureTrace* trace) {
  check_fragment(fragment, sentence.size());
  const auto n = static_cast<std::ptrdiff_t>(fragment.start);
  const auto m = static_cast<std::ptrdiff_t>(fragment.end);
  std::vector<std::string> cased(sentence.tokens().begin() + n,
                                 sentence.tokens().begin() + m);
  std::vector<std::string> lower(sentence.lowered().begin() + n,
                                 sentence.lowered().begin() + m);

  std::vector<NamedSlice> out;
  std::size_t offset = 0;
  const auto g = FeatureGroup::kFragment;
  emit(out, "bow_cased", bag_of_words(word_cased.vocab().lookup(cased)), word_cased,
       MatrixId::kWordCased, g, offset, trace);
  emit(out, "bow_uncased", bag_of_words(word_uncased.vocab().lookup(lower)),
       word_uncased, MatrixId::kWordUncased, g, offset, trace);

  auto chars = char_ids(sentence.surface(fragment.start, fragment.end), char_embed.vocab());
  emit(out, "char_fofe_l2r", encode_ids_sparse(chars, alpha_char), char_embed,
       MatrixId::kChar, g, offset, trace);
  emit(out, "char_fofe_r2l", encode_ids_sparse_reversed(chars, alpha_char), char_embed,
       MatrixId::kChar, g, offset, trace);

  NamedSlice conv_slice{"char_conv",
                        char_conv(chars, char_embed, conv, trace ? &trace->conv : nullptr)};
  if (trace) trace->conv_offset = offset;
  out.push_back(std::move(conv_slice));
  return out;
}

std::vector<NamedSlice> context_features(const Sentence& sentence,
                                         const Fragment& fragment,
                                         const EmbeddingMatrix& word_cased,
                                         const EmbeddingMatrix& word_uncased,
                                         ForgettingFactor alpha_word,
                                         FeatureTrace* trace) {
  check_fragment(fragment, sentence.size());
  const auto cased = word_cased.vocab().lookup(sentence.tokens());
  const auto lower = word_uncased.vocab().lookup(sentence.lowered());
  const std::span<const std::size_t> c(cased), u(lower);
  const std::size_t s = fragment.start, e = fragment.end, n = sentence.size();

  std::vector<NamedSlice> out;
  std::size_t offset = 0;
  const auto g = FeatureGroup::kContext;
  const double a = alpha_word.value();
  auto both = [&](const std::string& name, auto encoder, std::size_t from,
                  std::size_t to) {
    emit(out, name + "_cased", encoder(c.subspan(from, to - from), a), word_cased,
         MatrixId::kWordCased, g, offset, trace);
    emit(out, name + "_uncased", encoder(u.subspan(from, to - from), a), word_uncased,
         MatrixId::kWordUncased, g, offset, trace);
  };
  both("left_excl", encode_ids_sparse, 0, s);
  both("left_incl", encode_ids_sparse, 0, e);
  both("right_excl", encode_ids_sparse_reversed, e, n);
  both("right_incl", encode_ids_sparse_reversed, s, n);
  return out;
}

const FeatureSlice& FeatureLayout::slice(const std::string& name) const {
  for (const auto& s : slices) {
    if (s.name == name) return s;
  }
  throw InvalidArgument("unknown feature slice: " + name);
}

std::span<const double> FeatureBundle::slice(const std::string& name) const {
  const auto& s = layout->slice(name);
  const auto& group = s.group == FeatureGroup::kFragment ? fragment_group : context_group;
  return std::span<const double>(group).subspan(s.offset, s.length);
}

void FeatureGradients::zero() {
  std::fill(word_cased.begin(), word_cased.end(), 0.0);
  std::fill(word_uncased.begin(), word_uncased.end(), 0.0);
  std::fill(chars.begin(), chars.end(), 0.0);
  for (auto& w : conv.weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : conv.biases) std::fill(b.begin(), b.end(), 0.0);
}

FeatureExtractor::FeatureExtractor(EmbeddingMatrix word_cased,
                                   EmbeddingMatrix word_uncased, EmbeddingMatrix chars,
                                   CharConvFilters conv, ForgettingFactor alpha_word,
                                   ForgettingFactor alpha_char)
    : word_cased_(std::move(word_cased)),
      word_uncased_(std::move(word_uncased)),
      chars_(std::move(chars)),
      conv_(std::move(conv)),
      alpha_word_(alpha_word),
      alpha_char_(alpha_char) {
  if (word_cased_.dim() != word_uncased_.dim()) {
    throw DimensionMismatch("cased and uncased word embeddings differ in dimension");
  }
  if (chars_.dim() != conv_.config.char_embed_dim) {
    throw DimensionMismatch("char embedding dim differs from conv config");
  }
  auto layout = std::make_shared<FeatureLayout>();
  std::size_t offset = 0;
  auto add = [&](const std::string& name, FeatureGroup group, std::size_t len) {
    layout->slices.push_back({name, group, offset, len});
    offset += len;
  };
  const std::size_t dw = word_cased_.dim(), dc = chars_.dim();
  add("bow_cased", FeatureGroup::kFragment, dw);
  add("bow_uncased", FeatureGroup::kFragment, dw);
  add("char_fofe_l2r", FeatureGroup::kFragment, dc);
  add("char_fofe_r2l", FeatureGroup::kFragment, dc);
  add("char_conv", FeatureGroup::kFragment, conv_.output_dim());
  layout->fragment_dim = offset;
  offset = 0;
  for (const char* ctx : {"left_excl", "left_incl", "right_excl", "right_incl"}) {
    add(std::string(ctx) + "_cased", FeatureGroup::kContext, dw);
    add(std::string(ctx) + "_uncased", FeatureGroup::kContext, dw);
  }
  layout->context_dim = offset;
  layout_ = std::move(layout);
}

namespace {

std::vector<double> concat(const std::vector<NamedSlice>& slices) {
  std::vector<double> out;
  for (const auto& s : slices) out.insert(out.end(), s.values.begin(), s.values.end());
  return out;
}

}  // namespace

FeatureBundle FeatureExtractor::extract(const Sentence& sentence,
                                        const Fragment& fragment,
                                        FeatureTrace* trace) const {
  if (trace) *trace = FeatureTrace{};
  FeatureBundle bundle;
  bundle.fragment_group =
      concat(fragment_features(sentence, fragment, word_cased_, word_uncased_, chars_,
                               conv_, alpha_char_, trace));
  bundle.context_group = concat(
      context_features(sentence, fragment, word_cased_, word_uncased_, alpha_word_, trace));
  bundle.layout = layout_;
  return bundle;
}

std::vector<FeatureBundle> FeatureExtractor::extract_all(
    const Sentence& sentence, std::span<const Fragment> fragments) const {
  const std::size_t n = sentence.size();
  const std::size_t dw = word_cased_.dim();
  const auto cased = word_cased_.vocab().lookup(sentence.tokens());
  const auto lower = word_uncased_.vocab().lookup(sentence.lowered());
  const std::span<const std::size_t> c(cased), u(lower);
  const double a = alpha_word_.value();

  // left[b] encodes [0, b) left to right; right[b] encodes [b, n) right to left.
  // Each entry holds the cased projection followed by the uncased one.
  std::vector<std::vector<double>> left(n + 1), right(n + 1);
  for (std::size_t b = 0; b <= n; ++b) {
    left[b].resize(2 * dw);
    right[b].resize(2 * dw);
    std::span<double> l(left[b]), r(right[b]);
    project_into(encode_ids_sparse(c.subspan(0, b), a), word_cased_, l.subspan(0, dw));
    project_into(encode_ids_sparse(u.subspan(0, b), a), word_uncased_, l.subspan(dw, dw));
    project_into(encode_ids_sparse_reversed(c.subspan(b), a), word_cased_,
                 r.subspan(0, dw));
    project_into(encode_ids_sparse_reversed(u.subspan(b), a), word_uncased_,
                 r.subspan(dw, dw));
  }

  std::vector<FeatureBundle> bundles;
  bundles.reserve(fragments.size());
  for (const auto& fragment : fragments) {
    FeatureBundle bundle;
    bundle.fragment_group =
        concat(fragment_features(sentence, fragment, word_cased_, word_uncased_, chars_,
                                 conv_, alpha_char_));
    auto& ctx = bundle.context_group;
    ctx.reserve(layout_->context_dim);
    for (const auto* part : {&left[fragment.start], &left[fragment.end],
                             &right[fragment.end], &right[fragment.start]}) {
      ctx.insert(ctx.end(), part->begin(), part->end());
    }
    bundle.layout = layout_;
    bundles.push_back(std::move(bundle));
  }
  return bundles;
}

const EmbeddingMatrix& FeatureExtractor::matrix(MatrixId id) const {
  switch (id) {
    case MatrixId::kWordCased:
      return word_cased_;
    case MatrixId::kWordUncased:
      return word_uncased_;
    case MatrixId::kChar:
      break;
  }
  return chars_;
}

void FeatureExtractor::backward(const FeatureTrace& trace,
                                std::span<const double> d_fragment,
                                std::span<const double> d_context,
                                FeatureGradients& grads) const {
  if (d_fragment.size() != fragment_dim() || d_context.size() != context_dim()) {
    throw DimensionMismatch("feature gradient size differs from layout");
  }
  auto buffer = [&](MatrixId id) -> std::vector<double>* {
    switch (id) {
      case MatrixId::kWordCased:
        return word_cased_.trainable() ? &grads.word_cased : nullptr;
      case MatrixId::kWordUncased:
        return word_uncased_.trainable() ? &grads.word_uncased : nullptr;
      case MatrixId::kChar:
        break;
    }
    return chars_.trainable() ? &grads.chars : nullptr;
  };
  for (const auto& p : trace.projections) {
    auto* target = buffer(p.matrix);
    if (!target) continue;
    const auto& m = matrix(p.matrix);
    auto upstream = (p.group == FeatureGroup::kFragment ? d_fragment : d_context)
                        .subspan(p.offset, m.dim());
    project_backward(p.code, upstream, *target, m.dim());
  }
  auto* d_chars = buffer(MatrixId::kChar);
  char_conv_backward(trace.conv, d_fragment.subspan(trace.conv_offset, conv_.output_dim()),
                     chars_, conv_,
                     d_chars ? std::span<double>(*d_chars) : std::span<double>(),
                     grads.conv);
}

FeatureGradients FeatureExtractor::zero_gradients() const {
  FeatureGradients g;
  g.word_cased.assign(word_cased_.trainable() ? word_cased_.data().size() : 0, 0.0);
  g.word_uncased.assign(word_uncased_.trainable() ? word_uncased_.data().size() : 0, 0.0);
  g.chars.assign(chars_.trainable() ? chars_.data().size() : 0, 0.0);
  g.conv = CharConvFilters::zeros(conv_.config);
  return g;
}

std::vector<std::span<double>> FeatureExtractor::parameters() {
  std::vector<std::span<double>> out;
  for (auto* m : {&word_cased_, &word_uncased_, &chars_}) {
    if (m->trainable()) out.emplace_back(m->data());
  }
  for (auto& w : conv_.weights) out.emplace_back(w);
  for (auto& b : conv_.biases) out.emplace_back(b);
  return out;
}

std::vector<std::span<double>> FeatureExtractor::gradients(FeatureGradients& grads) const {
  std::vector<std::span<double>> out;
  if (word_cased_.trainable()) out.emplace_back(grads.word_cased);
  if (word_uncased_.trainable()) out.emplace_back(grads.word_uncased);
  if (chars_.trainable()) out.emplace_back(grads.chars);
  for (auto& w : grads.conv.weights) out.emplace_back(w);
  for (auto& b : grads.conv.biases) out.emplace_back(b);
  return out;
}

}  // namespace fofe_ner
