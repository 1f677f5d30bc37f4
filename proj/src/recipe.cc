#include "fofe_ner/recipe.h"

#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <unordered_set>

#include "fofe_ner/conll.h"
#include "fofe_ner/embedding.h"
#include "fofe_ner/errors.h"
#include "fofe_ner/features.h"
#include "fofe_ner/network.h"
#include "fofe_ner/text.h"

namespace fofe_ner {

std::vector<std::string> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open label file: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  if (out.empty()) throw ConfigError("label file lists no classes: " + path);
  return out;
}

std::vector<std::string> derive_labels(const Corpus& corpus) {
  std::set<std::string> names;
  for (const auto& span : corpus.gold) names.insert(span.label);
  return {names.begin(), names.end()};
}

Corpus load_corpus(const std::string& path, Tokenization tokenization,
                   std::vector<std::string>* repairs) {
  auto docs = read_conll(path, repairs);
  if (tokenization == Tokenization::kCharacter) {
    for (auto& doc : docs) doc = to_character_level(doc);
  }
  return flatten(docs);
}

NerModel build_model(const RunConfig& config, const LabelSet& labels, const Corpus& train,
                     const std::vector<const Corpus*>& vocab_corpora) {
  config.validate();
  std::mt19937_64 rng(config.training.seed);

  std::vector<std::string> train_tokens;
  std::unordered_set<std::string> seen;
  std::set<std::string> extra_chars;
  for (const auto& sentence : train.sentences) {
    for (const auto& token : sentence.tokens()) {
      if (seen.insert(token).second) train_tokens.push_back(token);
      for (auto& ch : utf8_characters(token)) {
        if (ch.size() > 1) extra_chars.insert(ch);
      }
    }
  }

  std::optional<CasedEmbeddings> words;
  if (!config.embeddings_path.empty()) {
    EmbeddingLoadPolicy policy;
    policy.seed = config.training.seed;
    policy.extra_tokens = train_tokens;
    if (config.restrict_vocab) {
      std::unordered_set<std::string> keep;
      auto add = [&keep](const Corpus& c) {
        for (const auto& s : c.sentences) {
          for (const auto& t : s.tokens()) {
            keep.insert(t);
            keep.insert(lowercase(t));
          }
        }
      };
      add(train);
      for (const Corpus* c : vocab_corpora) add(*c);
      policy.restrict_to = std::move(keep);
    }
    words.emplace(load_embeddings(config.embeddings_path, policy));
  } else {
    words.emplace(random_embeddings(train_tokens, config.word_embed_dim, config.training.seed));
  }

  auto char_vocab = make_char_vocabulary({extra_chars.begin(), extra_chars.end()});
  auto chars = EmbeddingMatrix::random(char_vocab, config.char_embed_dim, rng);
  CharConvConfig conv_config;
  conv_config.widths = config.conv_widths;
  conv_config.filters_per_width = config.conv_filters;
  conv_config.char_embed_dim = config.char_embed_dim;
  auto conv = CharConvFilters::glorot(conv_config, rng);

  FeatureExtractor features(std::move(words->cased), std::move(words->uncased),
                            std::move(chars), std::move(conv),
                            ForgettingFactor(config.training.alpha_word),
                            ForgettingFactor(config.training.alpha_char));

  NetworkShape shape;
  shape.fragment_input = features.fragment_dim();
  shape.context_input = features.context_dim();
  shape.fragment_layers = config.fragment_layers;
  shape.context_layers = config.context_layers;
  shape.shared_layers = config.shared_layers;
  shape.num_classes = labels.size();
  auto network = GroupedNetwork::init(shape, rng());

  ModelSettings settings;
  settings.max_fragment_len = config.max_fragment_len;
  settings.threshold = config.threshold;
  settings.tokenization = config.tokenization;
  return NerModel(std::move(features), std::move(network), labels, settings);
}

TrainResult run_training(const RunConfig& config, std::ostream* log, std::ostream* info) {
  config.validate();
  if (config.train_path.empty()) throw ConfigError("no training file configured (train)");
  if (config.dev_path.empty()) throw ConfigError("no development file configured (dev)");

  std::vector<std::string> repairs;
  Corpus train_corpus = load_corpus(config.train_path, config.tokenization, &repairs);
  Corpus dev_corpus = load_corpus(config.dev_path, config.tokenization, &repairs);
  std::optional<Corpus> test_corpus;
  if (!config.test_path.empty()) {
    test_corpus = load_corpus(config.test_path, config.tokenization, &repairs);
  }
  if (info) {
    for (const auto& r : repairs) *info << "bio repair: " << r << '\n';
  }

  LabelSet labels(config.labels_path.empty() ? derive_labels(train_corpus)
                                             : read_labels(config.labels_path));
  std::vector<const Corpus*> others{&dev_corpus};
  if (test_corpus) others.push_back(&*test_corpus);
  NerModel model = build_model(config, labels, train_corpus, others);

  auto candidates = build_candidates(train_corpus, labels, config.max_fragment_len);
  auto pool = CandidatePool::build(candidates, labels.none());
  if (info) {
    *info << "sentences " << train_corpus.sentences.size() << ", candidates "
          << pool.size() << " (" << pool.positives.size() << " entities), parameters "
          << model.network().parameter_count() << '\n';
  }

  std::ofstream log_file;
  if (!config.log_path.empty()) {
    log_file.open(config.log_path, std::ios::binary);
    if (!log_file) throw ConfigError("cannot open log file: " + config.log_path);
  }
  // Fan out epoch records to both sinks.
  struct Tee : std::streambuf {
    std::streambuf* a;
    std::streambuf* b;
    int overflow(int c) override {
      if (c == EOF) return 0;
      if (a) a->sputc(static_cast<char>(c));
      if (b) b->sputc(static_cast<char>(c));
      return c;
    }
    int sync() override {
      if (a) a->pubsync();
      if (b) b->pubsync();
      return 0;
    }
  } tee;
  tee.a = log ? log->rdbuf() : nullptr;
  tee.b = log_file.is_open() ? log_file.rdbuf() : nullptr;
  std::ostream sink(&tee);

  TrainResult result = train(model, train_corpus.sentences, pool, dev_corpus,
                             config.training, (tee.a || tee.b) ? &sink : nullptr);
  sink.flush();
  if (!config.model_path.empty()) model.save(config.model_path);
  return result;
}

}  // namespace fofe_ner
