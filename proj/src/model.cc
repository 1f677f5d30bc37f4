#include "fofe_ner/model.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#ifdef FOFE_NER_VENDOR_JSON
#include "json.hpp"
#else
#include <nlohmann/json.hpp>
#endif

#include "fofe_ner/errors.h"

namespace fofe_ner {

namespace {

constexpr char kMagic[8] = {'F', 'O', 'F', 'E', 'N', 'E', 'R', '\0'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kPredictChunk = 512;

static_assert(std::endian::native == std::endian::little,
              "model files store little-endian doubles");

}  // namespace

void ModelGradients::zero() {
  features.zero();
  for (auto span : network.parameters()) std::fill(span.begin(), span.end(), 0.0);
}

NerModel::NerModel(FeatureExtractor features, GroupedNetwork network, LabelSet labels,
                   ModelSettings settings)
    : features_(std::move(features)),
      network_(std::move(network)),
      labels_(std::move(labels)),
      settings_(settings) {
  if (network_.shape.fragment_input != features_.fragment_dim() ||
      network_.shape.context_input != features_.context_dim()) {
    throw DimensionMismatch("network inputs do not match feature layout");
  }
  if (network_.shape.num_classes != labels_.size()) {
    throw DimensionMismatch("network class count differs from label set");
  }
  if (settings_.max_fragment_len == 0) {
    throw InvalidArgument("max fragment length must be >= 1");
  }
}

std::vector<CandidatePrediction> NerModel::predict(const Sentence& sentence,
                                                   std::size_t sentence_index) const {
  auto fragments =
      enumerate_fragments(sentence_index, sentence.size(), settings_.max_fragment_len);
  std::vector<CandidatePrediction> out;
  out.reserve(fragments.size());
  for (std::size_t begin = 0; begin < fragments.size(); begin += kPredictChunk) {
    std::size_t count = std::min(kPredictChunk, fragments.size() - begin);
    std::span<const Fragment> chunk(fragments.data() + begin, count);
    auto bundles = features_.extract_all(sentence, chunk);
    Eigen::MatrixXd probs = forward(network_, make_batch(bundles), Mode::kInfer);
    for (std::size_t j = 0; j < count; ++j) {
      const auto col = probs.col(static_cast<Eigen::Index>(j));
      out.push_back({chunk[j], std::vector<double>(col.data(), col.data() + col.size())});
    }
  }
  return out;
}

std::vector<EntitySpan> NerModel::tag(std::span<const Sentence> sentences) const {
  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentences[i].empty()) continue;
    auto decoded = decode_entities(predict(sentences[i], i), labels_, settings_.threshold);
    spans.insert(spans.end(), decoded.begin(), decoded.end());
  }
  return spans;
}

double NerModel::compute_gradients(std::span<const Sentence> sentences,
                                   std::span<const LabeledFragment> batch, double dropout,
                                   std::mt19937_64* rng, ModelGradients& grads) const {
  std::vector<FeatureBundle> bundles;
  std::vector<FeatureTrace> traces(batch.size());
  std::vector<std::size_t> gold;
  bundles.reserve(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& item = batch[j];
    bundles.push_back(
        features_.extract(sentences[item.fragment.sentence], item.fragment, &traces[j]));
    gold.push_back(item.label);
  }
  ForwardCache cache;
  Eigen::MatrixXd probs =
      forward(network_, make_batch(bundles), Mode::kTrain, dropout, rng, &cache);
  double value = loss(probs, gold);

  NetworkGradients ng = backward(network_, cache, gold);
  grads.network = std::move(ng.params);
  grads.features.zero();
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    Eigen::VectorXd df = ng.d_fragment.col(jj);
    Eigen::VectorXd dc = ng.d_context.col(jj);
    features_.backward(traces[j], {df.data(), static_cast<std::size_t>(df.size())},
                       {dc.data(), static_cast<std::size_t>(dc.size())}, grads.features);
  }
  return value;
}

ModelGradients NerModel::zero_gradients() const {
  return {features_.zero_gradients(), GroupedNetwork::zeros(network_.shape)};
}

std::vector<std::span<double>> NerModel::parameters() {
  auto out = features_.parameters();
  auto net = network_.parameters();
  out.insert(out.end(), net.begin(), net.end());
  return out;
}

std::vector<std::span<double>> NerModel::gradients(ModelGradients& grads) const {
  auto out = features_.gradients(grads.features);
  auto net = grads.network.parameters();
  out.insert(out.end(), net.begin(), net.end());
  return out;
}

namespace {

using nlohmann::json;

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << v;
  return s.str();
}

json vocab_json(const EmbeddingMatrix& m) {
  const auto& v = m.vocab();
  return {{"tokens", v.tokens()},
          {"unknown", v.token(v.unknown_index())},
          {"fingerprint", hex(v.fingerprint())},
          {"dim", m.dim()},
          {"trainable", m.trainable()}};
}

EmbeddingMatrix matrix_from_json(const json& j) {
  auto vocab = std::make_shared<const Vocabulary>(
      j.at("tokens").get<std::vector<std::string>>(), j.at("unknown").get<std::string>());
  if (hex(vocab->fingerprint()) != j.at("fingerprint").get<std::string>()) {
    throw FormatError("vocabulary fingerprint mismatch");
  }
  return EmbeddingMatrix(vocab, j.at("dim").get<std::size_t>(),
                         j.at("trainable").get<bool>());
}

const char* tokenization_name(Tokenization t) {
  return t == Tokenization::kCharacter ? "character" : "word";
}

}  // namespace

void NerModel::save(std::ostream& out) const {
  const auto& conv = features_.conv().config;
  const auto& shape = network_.shape;
  json header = {
      {"format", "fofe-ner-model"},
      {"version", kFormatVersion},
      {"labels", labels_.entity_classes()},
      {"settings",
       {{"max_fragment_len", settings_.max_fragment_len},
        {"threshold", settings_.threshold},
        {"tokenization", tokenization_name(settings_.tokenization)},
        {"alpha_word", features_.alpha_word().value()},
        {"alpha_char", features_.alpha_char().value()}}},
      {"char_conv",
       {{"widths", conv.widths},
        {"filters_per_width", conv.filters_per_width},
        {"char_embed_dim", conv.char_embed_dim},
        {"pad", conv.pad}}},
      {"network",
       {{"fragment_input", shape.fragment_input},
        {"context_input", shape.context_input},
        {"fragment_layers", shape.fragment_layers},
        {"context_layers", shape.context_layers},
        {"shared_layers", shape.shared_layers},
        {"num_classes", shape.num_classes}}},
      {"vocabularies",
       {{"word_cased", vocab_json(features_.word_cased())},
        {"word_uncased", vocab_json(features_.word_uncased())},
        {"chars", vocab_json(features_.chars())}}},
  };

  // Every tensor, trainable or not, in declared order.
  std::vector<std::pair<std::string, std::span<const double>>> tensors;
  tensors.emplace_back("word_cased", features_.word_cased().data());
  tensors.emplace_back("word_uncased", features_.word_uncased().data());
  tensors.emplace_back("chars", features_.chars().data());
  for (std::size_t k = 0; k < conv.widths.size(); ++k) {
    tensors.emplace_back("conv_weight_" + std::to_string(k), features_.conv().weights[k]);
  }
  for (std::size_t k = 0; k < conv.widths.size(); ++k) {
    tensors.emplace_back("conv_bias_" + std::to_string(k), features_.conv().biases[k]);
  }
  std::size_t index = 0;
  for (auto span : network_.parameters()) {
    tensors.emplace_back("network_" + std::to_string(index++), span);
  }
  json table = json::array();
  for (const auto& [name, data] : tensors) {
    table.push_back({{"name", name}, {"size", data.size()}});
  }
  header["tensors"] = table;

  const std::string text = header.dump();
  const std::uint64_t length = text.size();
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&kFormatVersion), sizeof(kFormatVersion));
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, data] : tensors) {
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!out) throw FormatError("failed writing model");
}

void NerModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open model file for writing: " + path);
  save(out);
}

NerModel NerModel::load(std::istream& in) {
  try {
    return load_unchecked(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad model header: ") + e.what());
  }
}

NerModel NerModel::load_unchecked(std::istream& in) {
  char magic[sizeof(kMagic)];
  std::uint32_t version = 0;
  std::uint64_t length = 0;
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a fofe-ner model file");
  }
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || version != kFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw FormatError("truncated model header");

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad model header: ") + e.what());
  }

  const auto& s = header.at("settings");
  const auto& c = header.at("char_conv");
  const auto& n = header.at("network");
  const auto& v = header.at("vocabularies");

  CharConvConfig conv;
  conv.widths = c.at("widths").get<std::vector<std::size_t>>();
  conv.filters_per_width = c.at("filters_per_width").get<std::size_t>();
  conv.char_embed_dim = c.at("char_embed_dim").get<std::size_t>();
  conv.pad = c.at("pad").get<bool>();

  NetworkShape shape;
  shape.fragment_input = n.at("fragment_input").get<std::size_t>();
  shape.context_input = n.at("context_input").get<std::size_t>();
  shape.fragment_layers = n.at("fragment_layers").get<std::vector<std::size_t>>();
  shape.context_layers = n.at("context_layers").get<std::vector<std::size_t>>();
  shape.shared_layers = n.at("shared_layers").get<std::vector<std::size_t>>();
  shape.num_classes = n.at("num_classes").get<std::size_t>();

  ModelSettings settings;
  settings.max_fragment_len = s.at("max_fragment_len").get<std::size_t>();
  settings.threshold = s.at("threshold").get<double>();
  settings.tokenization = s.at("tokenization").get<std::string>() == "character"
                              ? Tokenization::kCharacter
                              : Tokenization::kWord;

  FeatureExtractor features(matrix_from_json(v.at("word_cased")),
                            matrix_from_json(v.at("word_uncased")),
                            matrix_from_json(v.at("chars")), CharConvFilters::zeros(conv),
                            ForgettingFactor(s.at("alpha_word").get<double>()),
                            ForgettingFactor(s.at("alpha_char").get<double>()));
  NerModel model(std::move(features), GroupedNetwork::zeros(shape),
                 LabelSet(header.at("labels").get<std::vector<std::string>>()), settings);

  std::vector<std::span<double>> tensors;
  tensors.emplace_back(model.features_.word_cased().data());
  tensors.emplace_back(model.features_.word_uncased().data());
  tensors.emplace_back(model.features_.chars().data());
  for (auto& w : model.features_.conv().weights) tensors.emplace_back(w);
  for (auto& b : model.features_.conv().biases) tensors.emplace_back(b);
  for (auto span : model.network_.parameters()) tensors.push_back(span);

  const auto& table = header.at("tensors");
  if (table.size() != tensors.size()) throw FormatError("tensor count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (table[i].at("size").get<std::size_t>() != tensors[i].size()) {
      throw FormatError("tensor size mismatch for " + table[i].at("name").get<std::string>());
    }
    in.read(reinterpret_cast<char*>(tensors[i].data()),
            static_cast<std::streamsize>(tensors[i].size() * sizeof(double)));
    if (!in) throw FormatError("truncated tensor data");
  }
  return model;
}

NerModel NerModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open model file: " + path);
  return load(in);
}

}  // namespace fofe_ner
