#ifndef FOFE_NER_VOCABULARY_H_
#define FOFE_NER_VOCABULARY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fofe_ner {

inline constexpr std::string_view kUnknownToken = "<unk>";
inline constexpr std::string_view kPaddingToken = "<pad>";

// Bijection between distinct token strings and [0, size()). Always holds a
// designated unknown entry; out-of-vocabulary lookups resolve to it.
class Vocabulary {
 public:
  // If `unknown` is not among `tokens` it is appended as the last entry.
  // Throws DuplicateToken when `tokens` repeats an entry.
  explicit Vocabulary(std::vector<std::string> tokens,
                      std::string_view unknown = kUnknownToken);

  std::size_t size() const { return tokens_.size(); }
  std::size_t unknown_index() const { return unknown_; }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::size_t lookup(std::string_view token) const;
  bool contains(std::string_view token) const;
  std::vector<std::size_t> lookup(std::span<const std::string> sequence) const;

  // FNV-1a over the token list, used to tie serialized tensors to the
  // vocabulary they index.
  std::uint64_t fingerprint() const;

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
  std::size_t unknown_ = 0;
};

}  // namespace fofe_ner

#endif  // FOFE_NER_VOCABULARY_H_
