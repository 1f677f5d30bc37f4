#include "fofe_ner/embedding.h"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "fofe_ner/errors.h"
#include "fofe_ner/text.h"

namespace fofe_ner {

EmbeddingMatrix::EmbeddingMatrix(std::shared_ptr<const Vocabulary> vocab,
                                 std::size_t dim, bool trainable)
    : vocab_(std::move(vocab)), dim_(dim), trainable_(trainable) {
  if (!vocab_) throw InvalidArgument("embedding matrix needs a vocabulary");
  if (dim_ == 0) throw InvalidArgument("embedding dimension must be positive");
  data_.assign(vocab_->size() * dim_, 0.0);
}

EmbeddingMatrix EmbeddingMatrix::random(std::shared_ptr<const Vocabulary> vocab,
                                        std::size_t dim, std::mt19937_64& rng) {
  EmbeddingMatrix m(std::move(vocab), dim);
  const double bound = 0.5 / static_cast<double>(dim);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : m.data_) v = dist(rng);
  return m;
}

void project_into(const SparseCode& code, const EmbeddingMatrix& matrix,
                  std::span<double> out) {
  const std::size_t dim = matrix.dim();
  if (out.size() != dim) throw DimensionMismatch("projection output size");
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& [index, weight] : code) {
    if (index >= matrix.rows()) {
      throw DimensionMismatch("code index " + std::to_string(index) +
                              " outside embedding matrix");
    }
    auto row = matrix.row(index);
    for (std::size_t d = 0; d < dim; ++d) out[d] += weight * row[d];
  }
}

std::vector<double> project(const SparseCode& code, const EmbeddingMatrix& matrix) {
  std::vector<double> out(matrix.dim());
  project_into(code, matrix, out);
  return out;
}

std::vector<double> project(const FofeCode& code, const EmbeddingMatrix& matrix) {
  if (code.values.size() != matrix.rows()) {
    throw DimensionMismatch("code dimension " + std::to_string(code.values.size()) +
                            " != vocabulary size " + std::to_string(matrix.rows()));
  }
  return project(code.sparse(), matrix);
}

void project_backward(const SparseCode& code, std::span<const double> d_out,
                      std::span<double> d_matrix, std::size_t dim) {
  for (const auto& [index, weight] : code) {
    double* row = d_matrix.data() + index * dim;
    for (std::size_t d = 0; d < dim; ++d) row[d] += weight * d_out[d];
  }
}

namespace {

std::vector<double> random_row(std::size_t dim, std::mt19937_64& rng) {
  const double bound = 0.5 / static_cast<double>(dim);
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> row(dim);
  for (double& v : row) v = dist(rng);
  return row;
}

// Assembles cased and uncased matrices from known rows plus randomly
// initialized extras.
CasedEmbeddings assemble(std::vector<std::string> tokens,
                         std::vector<std::vector<double>> rows,
                         const std::vector<std::string>& extras, std::size_t dim,
                         std::mt19937_64& rng) {
  const std::size_t known = tokens.size();

  // Uncased rows: mean over known cased rows sharing a lowercase form.
  std::vector<std::string> lower_tokens;
  std::vector<std::vector<double>> lower_sums;
  std::vector<std::size_t> lower_counts;
  std::unordered_map<std::string, std::size_t> lower_index;
  for (std::size_t i = 0; i < known; ++i) {
    std::string lower = lowercase(tokens[i]);
    auto [it, inserted] = lower_index.emplace(lower, lower_tokens.size());
    if (inserted) {
      lower_tokens.push_back(std::move(lower));
      lower_sums.emplace_back(dim, 0.0);
      lower_counts.push_back(0);
    }
    auto& sum = lower_sums[it->second];
    for (std::size_t d = 0; d < dim; ++d) sum[d] += rows[i][d];
    ++lower_counts[it->second];
  }
  for (std::size_t k = 0; k < lower_sums.size(); ++k) {
    for (double& v : lower_sums[k]) v /= static_cast<double>(lower_counts[k]);
  }

  std::unordered_set<std::string> cased_seen(tokens.begin(), tokens.end());
  for (const auto& extra : extras) {
    if (extra == kUnknownToken) continue;
    if (cased_seen.insert(extra).second) {
      tokens.push_back(extra);
      rows.push_back(random_row(dim, rng));
    }
    std::string lower = lowercase(extra);
    if (lower_index.emplace(lower, lower_tokens.size()).second) {
      lower_tokens.push_back(std::move(lower));
      lower_sums.push_back(random_row(dim, rng));
    }
  }

  auto cased_vocab = std::make_shared<const Vocabulary>(std::move(tokens));
  auto uncased_vocab = std::make_shared<const Vocabulary>(std::move(lower_tokens));
  EmbeddingMatrix cased(cased_vocab, dim);
  EmbeddingMatrix uncased(uncased_vocab, dim);
  for (std::size_t i = 0; i < cased_vocab->size(); ++i) {
    auto src = i < rows.size() ? rows[i] : random_row(dim, rng);
    std::copy(src.begin(), src.end(), cased.row(i).begin());
  }
  for (std::size_t i = 0; i < uncased_vocab->size(); ++i) {
    auto src = i < lower_sums.size() ? lower_sums[i] : random_row(dim, rng);
    std::copy(src.begin(), src.end(), uncased.row(i).begin());
  }
  return {std::move(cased), std::move(uncased)};
}

}  // namespace

CasedEmbeddings load_embeddings(std::istream& in, const EmbeddingLoadPolicy& policy) {
  std::string line;
  if (!std::getline(in, line)) throw BadHeader("empty embedding file");
  std::istringstream header(line);
  long long count = -1, dim = -1;
  std::string trailing;
  if (!(header >> count >> dim) || (header >> trailing) || count < 0 || dim <= 0) {
    throw BadHeader("expected '<count> <dim>' header, got: " + line);
  }

  std::vector<std::string> tokens;
  std::vector<std::vector<double>> rows;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  long long read = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++read;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(dim));
    std::string value;
    while (fields >> value) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(value, &used));
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw DimensionMismatch("line " + std::to_string(line_no) +
                                ": bad number '" + value + "'");
      }
    }
    if (row.size() != static_cast<std::size_t>(dim)) {
      throw DimensionMismatch("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(dim) + " values, got " +
                              std::to_string(row.size()));
    }
    if (!seen.insert(token).second) {
      throw DuplicateToken("line " + std::to_string(line_no) +
                           ": duplicate token '" + token + "'");
    }
    if (policy.restrict_to && !policy.restrict_to->count(token) &&
        !policy.restrict_to->count(lowercase(token))) {
      continue;
    }
    tokens.push_back(std::move(token));
    rows.push_back(std::move(row));
  }
  if (read != count) {
    throw BadHeader("header announces " + std::to_string(count) + " rows, file has " +
                    std::to_string(read));
  }
  std::mt19937_64 rng(policy.seed);
  return assemble(std::move(tokens), std::move(rows), policy.extra_tokens,
                  static_cast<std::size_t>(dim), rng);
}

CasedEmbeddings load_embeddings(const std::string& path,
                                const EmbeddingLoadPolicy& policy) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open embedding file: " + path);
  return load_embeddings(in, policy);
}

CasedEmbeddings random_embeddings(const std::vector<std::string>& tokens,
                                  std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return assemble({}, {}, tokens, dim, rng);
}

void write_embeddings(std::ostream& out, const EmbeddingMatrix& matrix,
                      bool skip_unknown) {
  const auto& vocab = matrix.vocab();
  std::size_t count = vocab.size() - (skip_unknown ? 1 : 0);
  out << count << ' ' << matrix.dim() << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (skip_unknown && i == vocab.unknown_index()) continue;
    out << vocab.token(i);
    for (double v : matrix.row(i)) out << ' ' << v;
    out << '\n';
  }
}

}  // namespace fofe_ner
