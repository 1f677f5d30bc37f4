#ifndef FOFE_NER_SYNTHETIC_H_
#define FOFE_NER_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fofe_ner/conll.h"

namespace fofe_ner {

// Template-generated toy corpus: PER and LOC over a fixed 30-token vocabulary.
struct SyntheticCorpus {
  std::vector<std::string> vocabulary;
  std::vector<std::string> classes;
  ConllDocument train;
  ConllDocument heldout;
};

SyntheticCorpus make_synthetic(std::uint64_t seed = 7, std::size_t train_sentences = 50,
                               std::size_t heldout_sentences = 20);

// Writes train.conll, heldout.conll, embeddings.txt (random rows of width
// `embed_dim`), labels.txt and synthetic.cfg into `dir`.
void write_synthetic(const std::string& dir, std::uint64_t seed = 7,
                     std::size_t embed_dim = 16);

}  // namespace fofe_ner

#endif  // FOFE_NER_SYNTHETIC_H_
