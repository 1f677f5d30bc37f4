#include "fofe_ner/text.h"

#include "fofe_ner/errors.h"

namespace fofe_ner {

std::vector<std::string> utf8_characters(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = lead < 0xF0 ? 3 : 1;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    if (i + len > text.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::string lowercase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c >= 'A' && c <= 'Z') {
      out.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (c == 0xC3 && i + 1 < text.size()) {
      // U+00C0..U+00DE map to U+00E0..U+00FE, except U+00D7 (multiplication sign).
      auto next = static_cast<unsigned char>(text[i + 1]);
      if (next >= 0x80 && next <= 0x9E && next != 0x97) next += 0x20;
      out.push_back(static_cast<char>(c));
      out.push_back(static_cast<char>(next));
      ++i;
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

Sentence::Sentence(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  lowered_.reserve(tokens_.size());
  for (const auto& t : tokens_) lowered_.push_back(lowercase(t));
}

std::string Sentence::surface(std::size_t start, std::size_t end) const {
  std::string out;
  for (std::size_t i = start; i < end && i < tokens_.size(); ++i) {
    if (i > start) out.push_back(' ');
    out += tokens_[i];
  }
  return out;
}

void check_fragment(const Fragment& fragment, std::size_t sentence_size) {
  if (!(fragment.start < fragment.end && fragment.end <= sentence_size)) {
    throw InvalidArgument("fragment [" + std::to_string(fragment.start) + ", " +
                          std::to_string(fragment.end) + ") invalid for sentence of " +
                          std::to_string(sentence_size) + " tokens");
  }
}

}  // namespace fofe_ner
