#include "fofe_ner/synthetic.h"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>

#include "fofe_ner/errors.h"

namespace fofe_ner {

namespace {

const std::vector<std::string> kFirst = {"John", "Mary", "Anna", "Paul"};
const std::vector<std::string> kLast = {"Smith", "Jones"};
const std::vector<std::string> kPlaces = {"Paris", "London", "Berlin", "Rome", "Oslo", "Madrid"};
const std::vector<std::string> kOther = {"the", "a",   "met",   "visited", "in",    "from",
                                         "lives", "said", "to", "went",    "and",   "with",
                                         "today", "yesterday", "friend", "saw", ".", "old"};

// "P" and "L" are entity slots; everything else is literal.
const std::vector<std::vector<std::string>> kTemplates = {
    {"P", "met", "P", "in", "L", "."},
    {"P", "visited", "L", "yesterday", "."},
    {"P", "lives", "in", "L", "."},
    {"P", "said", "P", "went", "to", "L", "today", "."},
    {"a", "friend", "from", "L", "saw", "P", "."},
    {"P", "and", "P", "went", "to", "L", "."},
    {"P", "saw", "a", "friend", "in", "L", "today", "."},
    {"yesterday", "P", "visited", "old", "L", "."},
    {"P", "went", "from", "L", "to", "L", "with", "P", "."},
    {"today", "P", "and", "a", "friend", "visited", "the", "old", "L", "."},
    {"the", "old", "friend", "with", "P", "lives", "in", "L", "."},
    {"P", "went", "to", "L", "and", "L", "."},
};

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  // Modulo keeps the stream portable across standard libraries.
  return static_cast<std::size_t>(rng() % n);
}

ConllDocument generate(std::mt19937_64& rng, std::size_t count, const std::string& id) {
  ConllDocument doc;
  doc.id = id;
  for (std::size_t s = 0; s < count; ++s) {
    const auto& tmpl = kTemplates[pick(rng, kTemplates.size())];
    std::vector<std::string> tokens;
    std::vector<LabeledSpan> spans;
    for (const auto& slot : tmpl) {
      std::size_t start = tokens.size();
      if (slot == "P") {
        switch (pick(rng, 3)) {
          case 0:
            tokens.push_back(kFirst[pick(rng, kFirst.size())]);
            break;
          case 1:
            tokens.push_back(kFirst[pick(rng, kFirst.size())]);
            tokens.push_back(kLast[pick(rng, kLast.size())]);
            break;
          default:
            tokens.push_back(kLast[pick(rng, kLast.size())]);
        }
        spans.push_back({start, tokens.size(), "PER"});
      } else if (slot == "L") {
        tokens.push_back(kPlaces[pick(rng, kPlaces.size())]);
        spans.push_back({start, tokens.size(), "LOC"});
      } else {
        tokens.push_back(slot);
      }
    }
    doc.sentences.emplace_back(std::move(tokens));
    doc.gold.push_back(std::move(spans));
  }
  return doc;
}

}  // namespace

SyntheticCorpus make_synthetic(std::uint64_t seed, std::size_t train_sentences,
                               std::size_t heldout_sentences) {
  SyntheticCorpus out;
  out.vocabulary = kFirst;
  out.vocabulary.insert(out.vocabulary.end(), kLast.begin(), kLast.end());
  out.vocabulary.insert(out.vocabulary.end(), kPlaces.begin(), kPlaces.end());
  out.vocabulary.insert(out.vocabulary.end(), kOther.begin(), kOther.end());
  out.classes = {"PER", "LOC"};
  std::mt19937_64 rng(seed);
  out.train = generate(rng, train_sentences, "train");
  out.heldout = generate(rng, heldout_sentences, "heldout");
  return out;
}

void write_synthetic(const std::string& dir, std::uint64_t seed, std::size_t embed_dim) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&dir](const char* name) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw InvalidArgument(std::string("cannot write ") + name + " in " + dir);
    return out;
  };
  SyntheticCorpus corpus = make_synthetic(seed);
  {
    auto out = open("train.conll");
    write_conll(out, std::span<const ConllDocument>(&corpus.train, 1));
  }
  {
    auto out = open("heldout.conll");
    write_conll(out, std::span<const ConllDocument>(&corpus.heldout, 1));
  }
  {
    auto out = open("embeddings.txt");
    std::mt19937_64 rng(seed + 1);
    out << corpus.vocabulary.size() << ' ' << embed_dim << '\n' << std::setprecision(6);
    for (const auto& token : corpus.vocabulary) {
      out << token;
      for (std::size_t d = 0; d < embed_dim; ++d) {
        // Uniform in [-0.5, 0.5) on a 2^-20 grid, independent of <random> distributions.
        out << ' ' << (static_cast<double>(rng() >> 44) / 1048576.0 - 0.5);
      }
      out << '\n';
    }
  }
  {
    auto out = open("labels.txt");
    for (const auto& c : corpus.classes) out << c << '\n';
  }
  {
    auto out = open("synthetic.cfg");
    out << "# Toy corpus: 2 classes, 30-token vocabulary, 16-dim random embeddings.\n"
           "train = train.conll\n"
           "dev = train.conll\n"
           "test = heldout.conll\n"
           "embeddings = embeddings.txt\n"
           "labels = labels.txt\n"
           "learning_rate = 0.05\n"
           "momentum = 0.9\n"
           "batch_size = 32\n"
           "dropout = 0\n"
           "decay_factor = 0.0625\n"
           "max_epochs = 200\n"
           "patience = 10\n"
           "neg_ratio = 2\n"
           "seed = 1\n"
           "alpha_word = 0.5\n"
           "alpha_char = 0.8\n"
           "max_fragment_len = 3\n"
           "threshold = 0.5\n"
           "fragment_layers = 32\n"
           "context_layers = 32\n"
           "shared_layers = 32\n"
           "char_embed_dim = 8\n"
           "conv_widths = 2,3\n"
           "conv_filters = 8\n"
           "tokenization = word\n";
  }
}

}  // namespace fofe_ner
