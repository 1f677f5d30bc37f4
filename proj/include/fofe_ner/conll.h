#ifndef FOFE_NER_CONLL_H_
#define FOFE_NER_CONLL_H_

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fofe_ner/pipeline.h"
#include "fofe_ner/text.h"

namespace fofe_ner {

struct LabeledSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  bool operator==(const LabeledSpan&) const = default;
};

struct ConllDocument {
  std::string id;
  std::vector<Sentence> sentences;
  std::vector<std::vector<LabeledSpan>> gold;  // parallel to sentences
};

// Column format: one token per line, token in the first column, BIO/BIO2 tag
// in the last; blank lines end sentences; "-DOCSTART-" starts a document.
// An I-X that does not continue a B-X/I-X run opens a new span; each such
// repair is appended to `repairs` when given.
//
// Throws MalformedLine for column-count changes and unrecognized tags.
std::vector<ConllDocument> parse_conll(std::istream& in,
                                       std::vector<std::string>* repairs = nullptr);
std::vector<ConllDocument> read_conll(const std::string& path,
                                      std::vector<std::string>* repairs = nullptr);

// Writes "token tag" lines with BIO2 tags and a -DOCSTART- line per document.
void write_conll(std::ostream& out, std::span<const ConllDocument> documents);

// Splits every token into its characters and maps gold spans onto
// character offsets. A no-op on single-character tokens.
ConllDocument to_character_level(const ConllDocument& document);

Corpus flatten(std::span<const ConllDocument> documents);

}  // namespace fofe_ner

#endif  // FOFE_NER_CONLL_H_
