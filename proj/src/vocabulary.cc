#include "fofe_ner/vocabulary.h"

#include "fofe_ner/errors.h"

namespace fofe_ner {

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::string_view unknown)
    : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size() + 1);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw DuplicateToken("duplicate vocabulary entry: " + tokens_[i]);
    }
  }
  auto it = index_.find(unknown);
  if (it == index_.end()) {
    tokens_.emplace_back(unknown);
    it = index_.emplace(tokens_.back(), tokens_.size() - 1).first;
  }
  unknown_ = it->second;
}

std::size_t Vocabulary::lookup(std::string_view token) const {
  auto it = index_.find(token);
  return it == index_.end() ? unknown_ : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.find(token) != index_.end();
}

std::vector<std::size_t> Vocabulary::lookup(std::span<const std::string> sequence) const {
  std::vector<std::size_t> ids;
  ids.reserve(sequence.size());
  for (const auto& token : sequence) ids.push_back(lookup(token));
  return ids;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](unsigned char c) {
    hash ^= c;
    hash *= 1099511628211ULL;
  };
  for (const auto& token : tokens_) {
    for (char c : token) mix(static_cast<unsigned char>(c));
    mix(0);
  }
  return hash;
}

}  // namespace fofe_ner
