#ifndef FOFE_NER_TEXT_H_
#define FOFE_NER_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fofe_ner {

// Splits UTF-8 text into code points, each returned as its own string.
// Invalid lead bytes are passed through as single-byte characters.
std::vector<std::string> utf8_characters(std::string_view text);

// Lowercases ASCII and the Latin-1 supplement letters; everything else is
// copied unchanged.
std::string lowercase(std::string_view text);

// A tokenized sentence with a parallel lowercased view.
class Sentence {
 public:
  Sentence() = default;
  explicit Sentence(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::string>& lowered() const { return lowered_; }

  // Surface string of tokens [start, end) joined with single spaces.
  std::string surface(std::size_t start, std::size_t end) const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::string> lowered_;
};

// Contiguous token span [start, end) of one sentence, identified by the
// sentence's index in its corpus.
struct Fragment {
  std::size_t sentence = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool overlaps(const Fragment& other) const {
    return sentence == other.sentence && start < other.end && other.start < end;
  }
  bool operator==(const Fragment&) const = default;
};

// Throws InvalidArgument unless 0 <= start < end <= sentence_size.
void check_fragment(const Fragment& fragment, std::size_t sentence_size);

}  // namespace fofe_ner

#endif  // FOFE_NER_TEXT_H_
