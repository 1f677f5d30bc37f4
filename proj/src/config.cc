#include "fofe_ner/config.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fofe_ner/errors.h"

namespace fofe_ner {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

std::size_t to_count(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long long n = std::stoll(v, &used);
    if (used == v.size() && n >= 0) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
}

std::vector<std::size_t> to_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_count(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::string from_list(const std::vector<std::size_t>& list) {
  std::string out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(list[i]);
  }
  return out;
}

std::string from_double(double d) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, end);
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> kKeys = {
      "learning_rate", "momentum",       "batch_size",       "dropout",
      "decay_factor",  "max_epochs",     "patience",         "alpha_word",
      "alpha_char",    "max_fragment_len", "threshold",      "fragment_layers",
      "context_layers", "shared_layers", "char_embed_dim",   "neg_ratio",
      "seed",          "tokenization",   "conv_widths",      "conv_filters",
      "word_embed_dim", "restrict_vocab", "train",           "dev",
      "test",          "embeddings",     "labels",           "model",
      "log"};
  return kKeys;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto& t = training;
  if (key == "learning_rate") t.learning_rate = to_double(key, v);
  else if (key == "momentum") t.momentum = to_double(key, v);
  else if (key == "batch_size") t.batch_size = to_count(key, v);
  else if (key == "dropout") t.dropout = to_double(key, v);
  else if (key == "decay_factor") t.decay_factor = to_double(key, v);
  else if (key == "max_epochs") t.max_epochs = to_count(key, v);
  else if (key == "patience") t.patience = to_count(key, v);
  else if (key == "alpha_word") t.alpha_word = to_double(key, v);
  else if (key == "alpha_char") t.alpha_char = to_double(key, v);
  else if (key == "neg_ratio") t.neg_ratio = to_double(key, v);
  else if (key == "seed") t.seed = to_count(key, v);
  else if (key == "max_fragment_len") max_fragment_len = to_count(key, v);
  else if (key == "threshold") threshold = to_double(key, v);
  else if (key == "fragment_layers") fragment_layers = to_list(key, v);
  else if (key == "context_layers") context_layers = to_list(key, v);
  else if (key == "shared_layers") shared_layers = to_list(key, v);
  else if (key == "char_embed_dim") char_embed_dim = to_count(key, v);
  else if (key == "conv_widths") conv_widths = to_list(key, v);
  else if (key == "conv_filters") conv_filters = to_count(key, v);
  else if (key == "word_embed_dim") word_embed_dim = to_count(key, v);
  else if (key == "restrict_vocab") restrict_vocab = to_bool(key, v);
  else if (key == "tokenization") {
    if (v == "word") tokenization = Tokenization::kWord;
    else if (v == "character") tokenization = Tokenization::kCharacter;
    else throw ConfigError("tokenization: expected word or character, got '" + v + "'");
  }
  else if (key == "train") train_path = v;
  else if (key == "dev") dev_path = v;
  else if (key == "test") test_path = v;
  else if (key == "embeddings") embeddings_path = v;
  else if (key == "labels") labels_path = v;
  else if (key == "model") model_path = v;
  else if (key == "log") log_path = v;
  else throw ConfigError("unknown config key: " + key);
}

std::string RunConfig::get(const std::string& key) const {
  const auto& t = training;
  if (key == "learning_rate") return from_double(t.learning_rate);
  if (key == "momentum") return from_double(t.momentum);
  if (key == "batch_size") return std::to_string(t.batch_size);
  if (key == "dropout") return from_double(t.dropout);
  if (key == "decay_factor") return from_double(t.decay_factor);
  if (key == "max_epochs") return std::to_string(t.max_epochs);
  if (key == "patience") return std::to_string(t.patience);
  if (key == "alpha_word") return from_double(t.alpha_word);
  if (key == "alpha_char") return from_double(t.alpha_char);
  if (key == "neg_ratio") return from_double(t.neg_ratio);
  if (key == "seed") return std::to_string(t.seed);
  if (key == "max_fragment_len") return std::to_string(max_fragment_len);
  if (key == "threshold") return from_double(threshold);
  if (key == "fragment_layers") return from_list(fragment_layers);
  if (key == "context_layers") return from_list(context_layers);
  if (key == "shared_layers") return from_list(shared_layers);
  if (key == "char_embed_dim") return std::to_string(char_embed_dim);
  if (key == "conv_widths") return from_list(conv_widths);
  if (key == "conv_filters") return std::to_string(conv_filters);
  if (key == "word_embed_dim") return std::to_string(word_embed_dim);
  if (key == "restrict_vocab") return restrict_vocab ? "true" : "false";
  if (key == "tokenization") return tokenization == Tokenization::kCharacter ? "character" : "word";
  if (key == "train") return train_path;
  if (key == "dev") return dev_path;
  if (key == "test") return test_path;
  if (key == "embeddings") return embeddings_path;
  if (key == "labels") return labels_path;
  if (key == "model") return model_path;
  if (key == "log") return log_path;
  throw ConfigError("unknown config key: " + key);
}

void RunConfig::validate() const {
  training.validate();
  for (const auto* layers : {&fragment_layers, &context_layers, &shared_layers}) {
    if (layers->empty()) throw ConfigError("layer lists must not be empty");
    for (std::size_t n : *layers) {
      if (n == 0) throw ConfigError("layer sizes must be positive");
    }
  }
  if (max_fragment_len == 0) throw ConfigError("max_fragment_len must be >= 1");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  if (char_embed_dim == 0 || conv_filters == 0 || word_embed_dim == 0) {
    throw ConfigError("dimensions must be positive");
  }
  for (std::size_t w : conv_widths) {
    if (w == 0) throw ConfigError("conv widths must be >= 1");
  }
}

const std::map<std::string, Profile>& builtin_profiles() {
  using T = Tokenization;
  static const std::map<std::string, Profile> kProfiles = {
      {"conll2003", {0.256, {412, 412}, {512, 512}, {512}, T::kWord}},
      {"ontonotes-eng", {0.128, {412, 412}, {412, 412}, {612}, T::kWord}},
      {"ontonotes-zh", {0.128, {512, 512}, {512, 512}, {512, 512}, T::kCharacter}},
      {"conll2002", {0.126, {412, 412}, {512, 512}, {512}, T::kWord}},
      {"kbp-eng", {0.128, {512, 512}, {412, 412, 412}, {512}, T::kWord}},
      {"kbp-cmn", {0.128, {512, 512}, {512, 512}, {512}, T::kCharacter}},
      {"kbp-spa", {0.064, {412, 412}, {412, 412}, {512}, T::kWord}},
  };
  return kProfiles;
}

void apply_profile(RunConfig& config, const std::string& name) {
  auto it = builtin_profiles().find(name);
  if (it == builtin_profiles().end()) throw ConfigError("unknown profile: " + name);
  const Profile& p = it->second;
  config.training.learning_rate = p.learning_rate;
  config.fragment_layers = p.fragment_layers;
  config.context_layers = p.context_layers;
  config.shared_layers = p.shared_layers;
  config.tokenization = p.tokenization;
}

void read_config(std::istream& in, RunConfig& config, const std::string& base_dir) {
  static const std::vector<std::string> kPathKeys = {"train", "dev",   "test", "embeddings",
                                                     "labels", "model", "log"};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!base_dir.empty() && !value.empty() &&
        std::find(kPathKeys.begin(), kPathKeys.end(), key) != kPathKeys.end() &&
        std::filesystem::path(value).is_relative()) {
      value = (std::filesystem::path(base_dir) / value).lexically_normal().string();
    }
    config.set(key, value);
  }
}

void read_config_file(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  read_config(in, config, std::filesystem::path(path).parent_path().string());
}

std::string to_config_text(const RunConfig& config) {
  std::string out;
  for (const auto& key : RunConfig::keys()) {
    out += key + " = " + config.get(key) + "\n";
  }
  return out;
}

}  // namespace fofe_ner
