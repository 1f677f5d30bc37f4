#include "fofe_ner/fofe.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "fofe_ner/errors.h"

namespace fofe_ner {

ForgettingFactor::ForgettingFactor(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw InvalidArgument("forgetting factor must lie in (0, 1), got " +
                          std::to_string(value));
  }
}

SparseCode FofeCode::sparse() const {
  SparseCode out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) out.push_back({i, values[i]});
  }
  return out;
}

double FofeCode::mass() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

namespace {

// One recursion step on a sparse code: scale every entry, then add the
// one-hot of `id`. Matches the dense update bit for bit.
void step(SparseCode& code, std::size_t id, double alpha) {
  bool found = false;
  for (auto& entry : code) {
    entry.weight = alpha * entry.weight;
    if (entry.index == id) {
      entry.weight += 1.0;
      found = true;
    }
  }
  if (!found) code.push_back({id, 1.0});
}

}  // namespace

SparseCode encode_ids_sparse(std::span<const std::size_t> ids, double alpha) {
  SparseCode code;
  for (std::size_t id : ids) step(code, id, alpha);
  return code;
}

SparseCode encode_ids_sparse_reversed(std::span<const std::size_t> ids, double alpha) {
  SparseCode code;
  for (auto it = ids.rbegin(); it != ids.rend(); ++it) step(code, *it, alpha);
  return code;
}

SparseCode bag_of_words(std::span<const std::size_t> ids) {
  SparseCode code;
  for (std::size_t id : ids) {
    auto it = std::find_if(code.begin(), code.end(),
                           [id](const SparseEntry& e) { return e.index == id; });
    if (it == code.end()) {
      code.push_back({id, 1.0});
    } else {
      it->weight += 1.0;
    }
  }
  return code;
}

FofeCode encode_ids(std::span<const std::size_t> ids, std::size_t dim,
                    ForgettingFactor alpha) {
  FofeCode code{std::vector<double>(dim, 0.0), alpha, ids.size()};
  for (std::size_t id : ids) {
    if (id >= dim) throw DimensionMismatch("token id outside code dimension");
    for (double& v : code.values) v = alpha.value() * v;
    code.values[id] += 1.0;
  }
  return code;
}

FofeCode encode(std::span<const std::string> sequence, const Vocabulary& vocab,
                ForgettingFactor alpha) {
  return encode_ids(vocab.lookup(sequence), vocab.size(), alpha);
}

FofeCode encode_reversed(std::span<const std::string> sequence,
                         const Vocabulary& vocab, ForgettingFactor alpha) {
  auto ids = vocab.lookup(sequence);
  std::reverse(ids.begin(), ids.end());
  return encode_ids(ids, vocab.size(), alpha);
}

std::vector<std::size_t> decode_ids(const FofeCode& code, double epsilon) {
  const double alpha = code.alpha.value();
  if (alpha > 0.5) {
    throw InvalidArgument("exact decoding requires alpha <= 0.5");
  }
  constexpr double kRoundoff = std::numeric_limits<double>::epsilon() / 2;
  constexpr std::size_t kMaxSteps = 4096;

  std::vector<double> residual = code.values;
  std::deque<std::size_t> tokens;
  double amplification = 1.0;  // alpha^-j
  for (std::size_t j = 0;; ++j) {
    const double tol = epsilon + 64.0 * kRoundoff * amplification;
    bool empty = true;
    for (double v : residual) {
      if (v < -tol) throw MalformedCode("negative component in code");
      if (v >= tol) empty = false;
    }
    if (empty) break;
    if (j == kMaxSteps) throw MalformedCode("code does not terminate");

    std::size_t last = residual.size();
    for (std::size_t i = 0; i < residual.size(); ++i) {
      if (residual[i] >= 1.0 - tol) {
        if (last != residual.size()) {
          throw MalformedCode("several components >= 1 at step " + std::to_string(j));
        }
        last = i;
      }
    }
    if (last == residual.size()) {
      throw MalformedCode("no component >= 1 at step " + std::to_string(j));
    }
    tokens.push_front(last);
    residual[last] -= 1.0;
    for (double& v : residual) v /= alpha;
    amplification /= alpha;
  }
  return {tokens.begin(), tokens.end()};
}

std::vector<std::string> decode(const FofeCode& code, const Vocabulary& vocab,
                                double epsilon) {
  if (code.values.size() != vocab.size()) {
    throw DimensionMismatch("code dimension differs from vocabulary size");
  }
  std::vector<std::string> out;
  for (std::size_t id : decode_ids(code, epsilon)) out.push_back(vocab.token(id));
  return out;
}

UniquenessReport uniqueness_check(std::size_t vocab_size, std::size_t max_len,
                                  ForgettingFactor alpha, double tolerance) {
  UniquenessReport report;
  std::vector<std::vector<std::size_t>> sequences;
  std::vector<std::vector<double>> codes;

  std::vector<std::size_t> current;
  for (std::size_t len = 0; len <= max_len; ++len) {
    current.assign(len, 0);
    while (true) {
      sequences.push_back(current);
      codes.push_back(encode_ids(current, vocab_size, alpha).values);
      // Odometer increment, rightmost digit fastest.
      std::size_t pos = len;
      while (pos > 0 && ++current[pos - 1] == vocab_size) current[--pos] = 0;
      if (pos == 0) break;
    }
  }
  report.total_sequences = sequences.size();
  if (vocab_size == 0) return report;

  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&codes](std::size_t a, std::size_t b) {
    return codes[a][0] < codes[b][0];
  });
  auto close = [&](std::size_t a, std::size_t b) {
    for (std::size_t k = 0; k < vocab_size; ++k) {
      if (std::abs(codes[a][k] - codes[b][k]) > tolerance) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (codes[order[j]][0] - codes[order[i]][0] > tolerance) break;
      if (close(order[i], order[j])) {
        std::size_t a = std::min(order[i], order[j]);
        std::size_t b = std::max(order[i], order[j]);
        report.collisions.emplace_back(sequences[a], sequences[b]);
      }
    }
  }
  std::sort(report.collisions.begin(), report.collisions.end());
  return report;
}

}  // namespace fofe_ner
