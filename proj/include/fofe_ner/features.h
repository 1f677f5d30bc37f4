#ifndef FOFE_NER_FEATURES_H_
#define FOFE_NER_FEATURES_H_

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fofe_ner/embedding.h"
#include "fofe_ner/fofe.h"
#include "fofe_ner/text.h"

namespace fofe_ner {

struct CharConvConfig {
  std::vector<std::size_t> widths{2, 3};
  std::size_t filters_per_width = 32;
  std::size_t char_embed_dim = 64;
  // Right-pad strings shorter than the widest filter with kPaddingToken.
  bool pad = true;

  std::size_t max_width() const;
  std::size_t output_dim() const { return widths.size() * filters_per_width; }
  void validate() const;
};

// Filter bank for the character convolution. For width index k the weights
// are stored filter-major, then window position, then embedding dimension.
struct CharConvFilters {
  CharConvConfig config;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static CharConvFilters zeros(const CharConvConfig& config);
  // Glorot-uniform weights with fan_in = width * D, fan_out = filters.
  static CharConvFilters glorot(const CharConvConfig& config, std::mt19937_64& rng);

  std::size_t output_dim() const { return config.output_dim(); }
};

struct CharConvTrace {
  std::vector<std::size_t> char_ids;  // after padding
  // Window start of the max-pooled position per output unit; -1 when the
  // ReLU output is zero and no gradient flows.
  std::vector<long> argmax;
};

// Character vocabulary: printable ASCII, a space, the given characters, and
// the reserved padding and unknown entries.
std::shared_ptr<const Vocabulary> make_char_vocabulary(
    const std::vector<std::string>& extra_characters);

std::vector<std::size_t> char_ids(const std::string& surface, const Vocabulary& chars);

// Sliding dot product + bias per filter, max-pooled over positions, ReLU.
// Throws FragmentTooShort when the input is shorter than the widest filter
// and padding is disabled.
std::vector<double> char_conv(std::span<const std::size_t> ids,
                              const EmbeddingMatrix& char_embed,
                              const CharConvFilters& filters,
                              CharConvTrace* trace = nullptr);
std::vector<double> char_conv(const std::string& surface,
                              const EmbeddingMatrix& char_embed,
                              const CharConvFilters& filters,
                              CharConvTrace* trace = nullptr);

void char_conv_backward(const CharConvTrace& trace, std::span<const double> d_out,
                        const EmbeddingMatrix& char_embed,
                        const CharConvFilters& filters, std::span<double> d_char_embed,
                        CharConvFilters& d_filters);

enum class FeatureGroup { kFragment, kContext };

struct NamedSlice {
  std::string name;
  std::vector<double> values;
};

struct FeatureSlice {
  std::string name;
  FeatureGroup group;
  std::size_t offset;
  std::size_t length;
};

// Declared slice order of both groups; shared by every bundle of an extractor.
struct FeatureLayout {
  std::vector<FeatureSlice> slices;
  std::size_t fragment_dim = 0;
  std::size_t context_dim = 0;

  const FeatureSlice& slice(const std::string& name) const;
};

struct FeatureBundle {
  std::vector<double> fragment_group;
  std::vector<double> context_group;
  std::shared_ptr<const FeatureLayout> layout;

  std::span<const double> slice(const std::string& name) const;
};

enum class MatrixId { kWordCased, kWordUncased, kChar };

// What the backward pass needs to route input gradients to parameters.
struct FeatureTrace {
  struct Projection {
    SparseCode code;
    MatrixId matrix;
    FeatureGroup group;
    std::size_t offset;
  };
  std::vector<Projection> projections;
  CharConvTrace conv;
  std::size_t conv_offset = 0;
};

// Fragment group, in order: bow_cased, bow_uncased, char_fofe_l2r,
// char_fofe_r2l, char_conv.
std::vector<NamedSlice> fragment_features(const Sentence& sentence,
                                          const Fragment& fragment,
                                          const EmbeddingMatrix& word_cased,
                                          const EmbeddingMatrix& word_uncased,
                                          const EmbeddingMatrix& char_embed,
                                          const CharConvFilters& conv,
                                          ForgettingFactor alpha_char,
                                          FeatureTrace* trace = nullptr);

// Context group, in order, each cased then uncased: left excluding the
// fragment, left including it (both left to right), right excluding, right
// including (both right to left, nearest word weighted 1).
std::vector<NamedSlice> context_features(const Sentence& sentence,
                                         const Fragment& fragment,
                                         const EmbeddingMatrix& word_cased,
                                         const EmbeddingMatrix& word_uncased,
                                         ForgettingFactor alpha_word,
                                         FeatureTrace* trace = nullptr);

struct FeatureGradients {
  std::vector<double> word_cased;
  std::vector<double> word_uncased;
  std::vector<double> chars;
  CharConvFilters conv;

  void zero();
};

class FeatureExtractor {
 public:
  FeatureExtractor(EmbeddingMatrix word_cased, EmbeddingMatrix word_uncased,
                   EmbeddingMatrix chars, CharConvFilters conv,
                   ForgettingFactor alpha_word, ForgettingFactor alpha_char);

  FeatureBundle extract(const Sentence& sentence, const Fragment& fragment,
                        FeatureTrace* trace = nullptr) const;

  // Same bundles as calling extract() per fragment, with the context codes
  // computed once per boundary. All fragments must belong to `sentence`.
  std::vector<FeatureBundle> extract_all(const Sentence& sentence,
                                         std::span<const Fragment> fragments) const;

  void backward(const FeatureTrace& trace, std::span<const double> d_fragment,
                std::span<const double> d_context, FeatureGradients& grads) const;

  FeatureGradients zero_gradients() const;

  // Trainable tensors in declared order; gradients() mirrors the order.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<double>> gradients(FeatureGradients& grads) const;

  const std::shared_ptr<const FeatureLayout>& layout() const { return layout_; }
  std::size_t fragment_dim() const { return layout_->fragment_dim; }
  std::size_t context_dim() const { return layout_->context_dim; }

  const EmbeddingMatrix& word_cased() const { return word_cased_; }
  const EmbeddingMatrix& word_uncased() const { return word_uncased_; }
  const EmbeddingMatrix& chars() const { return chars_; }
  const CharConvFilters& conv() const { return conv_; }
  EmbeddingMatrix& word_cased() { return word_cased_; }
  EmbeddingMatrix& word_uncased() { return word_uncased_; }
  EmbeddingMatrix& chars() { return chars_; }
  CharConvFilters& conv() { return conv_; }
  ForgettingFactor alpha_word() const { return alpha_word_; }
  ForgettingFactor alpha_char() const { return alpha_char_; }

 private:
  const EmbeddingMatrix& matrix(MatrixId id) const;

  EmbeddingMatrix word_cased_;
  EmbeddingMatrix word_uncased_;
  EmbeddingMatrix chars_;
  CharConvFilters conv_;
  ForgettingFactor alpha_word_;
  ForgettingFactor alpha_char_;
  std::shared_ptr<const FeatureLayout> layout_;
};

}  // namespace fofe_ner

#endif  // FOFE_NER_FEATURES_H_
