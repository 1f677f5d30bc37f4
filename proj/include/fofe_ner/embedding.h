#ifndef FOFE_NER_EMBEDDING_H_
#define FOFE_NER_EMBEDDING_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "fofe_ner/fofe.h"
#include "fofe_ner/vocabulary.h"

namespace fofe_ner {

// Row-major |V| x D projection matrix indexed by a vocabulary.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(std::shared_ptr<const Vocabulary> vocab, std::size_t dim,
                  bool trainable = true);

  // Rows drawn uniformly from [-0.5/D, 0.5/D].
  static EmbeddingMatrix random(std::shared_ptr<const Vocabulary> vocab,
                                std::size_t dim, std::mt19937_64& rng);

  std::size_t rows() const { return vocab_->size(); }
  std::size_t dim() const { return dim_; }
  bool trainable() const { return trainable_; }
  void set_trainable(bool trainable) { trainable_ = trainable; }

  const Vocabulary& vocab() const { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& shared_vocab() const { return vocab_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  std::size_t dim_;
  bool trainable_;
  std::vector<double> data_;
};

// Matrix-vector product of a code with the embedding matrix, evaluated as a
// weighted sum of the rows named by the code's nonzero entries.
void project_into(const SparseCode& code, const EmbeddingMatrix& matrix,
                  std::span<double> out);
std::vector<double> project(const SparseCode& code, const EmbeddingMatrix& matrix);
std::vector<double> project(const FofeCode& code, const EmbeddingMatrix& matrix);

// Accumulates d(out)/d(matrix) * d_out into a dense gradient buffer shaped
// like matrix.data().
void project_backward(const SparseCode& code, std::span<const double> d_out,
                      std::span<double> d_matrix, std::size_t dim);

struct CasedEmbeddings {
  EmbeddingMatrix cased;
  EmbeddingMatrix uncased;
};

struct EmbeddingLoadPolicy {
  // Keep only file tokens whose surface or lowercase form is in this set.
  std::optional<std::unordered_set<std::string>> restrict_to;
  // Tokens to add when absent from the file; they receive random rows.
  std::vector<std::string> extra_tokens;
  std::uint64_t seed = 0;
};

// Reads the text format: a "<count> <dim>" header followed by one
// "<token> <d1> ... <dD>" line per token. The uncased matrix averages the
// rows of all file tokens sharing a lowercase form.
//
// Throws BadHeader, DimensionMismatch (with line number) or DuplicateToken.
CasedEmbeddings load_embeddings(std::istream& in, const EmbeddingLoadPolicy& policy);
CasedEmbeddings load_embeddings(const std::string& path,
                                const EmbeddingLoadPolicy& policy);

// Random cased/uncased matrices over `tokens` when no pretrained file is used.
CasedEmbeddings random_embeddings(const std::vector<std::string>& tokens,
                                  std::size_t dim, std::uint64_t seed);

void write_embeddings(std::ostream& out, const EmbeddingMatrix& matrix,
                      bool skip_unknown = true);

}  // namespace fofe_ner

#endif  // FOFE_NER_EMBEDDING_H_
