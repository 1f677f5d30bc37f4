#ifndef FOFE_NER_CONFIG_H_
#define FOFE_NER_CONFIG_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fofe_ner/model.h"
#include "fofe_ner/trainer.h"

namespace fofe_ner {

// Everything a `train` run needs. Serialized as a flat "key = value" text
// document; see README.md for the key list.
struct RunConfig {
  TrainingConfig training;
  std::vector<std::size_t> fragment_layers{412, 412};
  std::vector<std::size_t> context_layers{512, 512};
  std::vector<std::size_t> shared_layers{512};
  std::size_t max_fragment_len = 7;
  double threshold = 0.5;
  Tokenization tokenization = Tokenization::kWord;
  std::size_t char_embed_dim = 64;
  std::vector<std::size_t> conv_widths{2, 3};
  std::size_t conv_filters = 32;
  // Used only when no embedding file is given.
  std::size_t word_embed_dim = 256;
  bool restrict_vocab = true;

  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string embeddings_path;
  std::string labels_path;
  std::string model_path;
  std::string log_path;

  static const std::vector<std::string>& keys();

  // Throws ConfigError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;

  void validate() const;
};

// Hyper-parameter profile: learning rate and layer sizes per data set.
struct Profile {
  double learning_rate;
  std::vector<std::size_t> fragment_layers;
  std::vector<std::size_t> context_layers;
  std::vector<std::size_t> shared_layers;
  Tokenization tokenization;
};

const std::map<std::string, Profile>& builtin_profiles();

// Throws ConfigError for unknown profile names.
void apply_profile(RunConfig& config, const std::string& name);

// Reads "key = value" lines; '#' starts a comment. Relative paths are
// resolved against `base_dir` when it is non-empty.
void read_config(std::istream& in, RunConfig& config, const std::string& base_dir = "");
void read_config_file(const std::string& path, RunConfig& config);

std::string to_config_text(const RunConfig& config);

}  // namespace fofe_ner

#endif  // FOFE_NER_CONFIG_H_
