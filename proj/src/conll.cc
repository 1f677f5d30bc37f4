#include "fofe_ner/conll.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fofe_ner/errors.h"

namespace fofe_ner {

namespace {

std::vector<std::string> split_columns(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> cols;
  std::string col;
  while (in >> col) cols.push_back(std::move(col));
  return cols;
}

class DocumentBuilder {
 public:
  explicit DocumentBuilder(std::vector<std::string>* repairs) : repairs_(repairs) {}

  void start_document() {
    end_sentence();
    docs_.push_back({"d" + std::to_string(docs_.size()), {}, {}});
  }

  void add_token(std::string token, const std::string& tag, std::size_t line) {
    if (docs_.empty()) start_document();
    std::string kind, cls;
    if (tag == "O") {
      kind = "O";
    } else if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
      kind = tag.substr(0, 1);
      cls = tag.substr(2);
    } else {
      throw MalformedLine(line, "unrecognized tag '" + tag + "'");
    }

    const std::size_t pos = tokens_.size();
    if (kind != "I" || !open_ || spans_.back().label != cls) {
      open_ = false;
    }
    if (kind == "B" || (kind == "I" && !open_)) {
      if (kind == "I" && repairs_) {
        repairs_->push_back("line " + std::to_string(line) + ": " + tag +
                            " does not continue a span; opened a new one");
      }
      spans_.push_back({pos, pos + 1, cls});
      open_ = true;
    } else if (kind == "I") {
      spans_.back().end = pos + 1;
    }
    tokens_.push_back(std::move(token));
  }

  void end_sentence() {
    if (!tokens_.empty()) {
      docs_.back().sentences.emplace_back(std::move(tokens_));
      docs_.back().gold.push_back(std::move(spans_));
    }
    tokens_.clear();
    spans_.clear();
    open_ = false;
  }

  std::vector<ConllDocument> finish() {
    end_sentence();
    return std::move(docs_);
  }

 private:
  std::vector<std::string>* repairs_;
  std::vector<ConllDocument> docs_;
  std::vector<std::string> tokens_;
  std::vector<LabeledSpan> spans_;
  bool open_ = false;
};

}  // namespace

std::vector<ConllDocument> parse_conll(std::istream& in, std::vector<std::string>* repairs) {
  DocumentBuilder builder(repairs);
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto cols = split_columns(line);
    if (cols.empty()) {
      builder.end_sentence();
      continue;
    }
    if (cols.front() == "-DOCSTART-") {
      builder.start_document();
      continue;
    }
    if (cols.size() < 2) {
      throw MalformedLine(line_no, "expected a token and a tag");
    }
    if (columns == 0) {
      columns = cols.size();
    } else if (cols.size() != columns) {
      throw MalformedLine(line_no, "expected " + std::to_string(columns) +
                                       " columns, got " + std::to_string(cols.size()));
    }
    builder.add_token(std::move(cols.front()), cols.back(), line_no);
  }
  return builder.finish();
}

std::vector<ConllDocument> read_conll(const std::string& path,
                                      std::vector<std::string>* repairs) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open CoNLL file: " + path);
  return parse_conll(in, repairs);
}

void write_conll(std::ostream& out, std::span<const ConllDocument> documents) {
  for (const auto& doc : documents) {
    out << "-DOCSTART- O\n\n";
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      const auto& tokens = doc.sentences[s].tokens();
      std::vector<std::string> tags(tokens.size(), "O");
      for (const auto& span : doc.gold[s]) {
        tags[span.start] = "B-" + span.label;
        for (std::size_t t = span.start + 1; t < span.end; ++t) tags[t] = "I-" + span.label;
      }
      for (std::size_t t = 0; t < tokens.size(); ++t) out << tokens[t] << ' ' << tags[t] << '\n';
      out << '\n';
    }
  }
}

ConllDocument to_character_level(const ConllDocument& document) {
  ConllDocument out{document.id, {}, {}};
  for (std::size_t s = 0; s < document.sentences.size(); ++s) {
    std::vector<std::string> chars;
    std::vector<std::size_t> offset;  // character offset of each token start
    for (const auto& token : document.sentences[s].tokens()) {
      offset.push_back(chars.size());
      for (auto& c : utf8_characters(token)) chars.push_back(std::move(c));
    }
    offset.push_back(chars.size());
    std::vector<LabeledSpan> spans;
    for (const auto& span : document.gold[s]) {
      spans.push_back({offset[span.start], offset[span.end], span.label});
    }
    out.sentences.emplace_back(std::move(chars));
    out.gold.push_back(std::move(spans));
  }
  return out;
}

Corpus flatten(std::span<const ConllDocument> documents) {
  Corpus corpus;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    const auto& doc = documents[d];
    corpus.document_ids.push_back(doc.id);
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      const std::size_t index = corpus.sentences.size();
      for (const auto& span : doc.gold[s]) {
        if (span.start >= span.end || span.end > doc.sentences[s].size()) {
          throw InvalidArgument("gold span outside sentence in document " + doc.id);
        }
        corpus.gold.push_back({index, span.start, span.end, span.label, 1.0});
      }
      corpus.sentences.push_back(doc.sentences[s]);
      corpus.origins.push_back({d, s});
    }
  }
  return corpus;
}

}  // namespace fofe_ner
