#include "fofe_ner/cli.h"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fofe_ner/config.h"
#include "fofe_ner/conll.h"
#include "fofe_ner/errors.h"
#include "fofe_ner/fofe.h"
#include "fofe_ner/model.h"
#include "fofe_ner/pipeline.h"
#include "fofe_ner/recipe.h"
#include "fofe_ner/synthetic.h"
#include "fofe_ner/text.h"

namespace fofe_ner {

namespace {

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Options shared by train and show-config.
struct ConfigOptions {
  std::string profile;
  std::string config_file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--profile", profile, "Named hyper-parameter profile")
        ->check(CLI::IsMember([] {
          std::vector<std::string> names;
          for (const auto& [name, p] : builtin_profiles()) names.push_back(name);
          return names;
        }()));
    app->add_option("--config", config_file, "key = value config file")
        ->check(CLI::ExistingFile);
    for (const auto& key : RunConfig::keys()) {
      app->add_option_function<std::string>(
          "--" + key, [this, key](const std::string& v) { overrides[key] = v; },
          "Override config key " + key);
    }
  }

  // Defaults, then the profile, then the config file, then flags.
  RunConfig resolve() const {
    RunConfig config;
    if (!profile.empty()) apply_profile(config, profile);
    if (!config_file.empty()) read_config_file(config_file, config);
    for (const auto& [key, value] : overrides) config.set(key, value);
    config.validate();
    return config;
  }
};

std::vector<Sentence> read_raw_document(std::istream& in, Tokenization tokenization,
                                        bool* more) {
  std::vector<Sentence> sentences;
  std::string line;
  *more = false;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    std::string token;
    while (fields >> token) {
      if (tokenization == Tokenization::kCharacter) {
        for (auto& ch : utf8_characters(token)) tokens.push_back(std::move(ch));
      } else {
        tokens.push_back(std::move(token));
      }
    }
    if (tokens.empty()) {
      if (!sentences.empty()) {
        *more = true;
        return sentences;
      }
      continue;
    }
    sentences.emplace_back(std::move(tokens));
  }
  return sentences;
}

void print_scores(std::ostream& out, const Scores& scores) {
  out << "class\tprecision\trecall\tf1\tcorrect\tpredicted\tgold\n";
  auto row = [&out](const std::string& name, const ClassScores& s) {
    out << name << '\t' << std::fixed << std::setprecision(4) << s.precision << '\t'
        << s.recall << '\t' << s.f1 << '\t' << s.correct << '\t' << s.predicted << '\t'
        << s.gold << '\n';
  };
  for (const auto& [name, s] : scores.per_class) row(name, s);
  row("overall", scores.overall);
  out.unsetf(std::ios::floatfield);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"FOFE span-based named entity recognition", "fofe-ner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fofe-ner 0.1.0");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model from a config");
  ConfigOptions train_opts;
  train_opts.attach(train_cmd);
  bool quiet = false;
  train_cmd->add_flag("--quiet", quiet, "Do not echo epoch records to stdout");

  // show-config
  auto* show_cmd = app.add_subcommand("show-config", "Print the resolved configuration");
  ConfigOptions show_opts;
  show_opts.attach(show_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score a model on a column-format file");
  std::string eval_model, eval_test;
  std::optional<double> eval_threshold;
  eval_cmd->add_option("--model", eval_model, "Model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--test", eval_test, "Column-format file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--threshold", eval_threshold, "Decoding threshold");

  // tag
  auto* tag_cmd = app.add_subcommand("tag", "Tag tokenized text, one sentence per line");
  std::string tag_model, tag_input = "-";
  std::optional<double> tag_threshold;
  tag_cmd->add_option("--model", tag_model, "Model file")->required()->check(CLI::ExistingFile);
  tag_cmd->add_option("--input", tag_input, "Input file, '-' for stdin");
  tag_cmd->add_option("--threshold", tag_threshold, "Decoding threshold");

  // fofe-inspect
  auto* inspect_cmd = app.add_subcommand("fofe-inspect", "Encoding utilities");
  inspect_cmd->require_subcommand(1);
  double alpha = 0.5;
  std::string vocab_list;
  bool reverse = false;
  std::vector<std::string> tokens;
  auto* encode_cmd = inspect_cmd->add_subcommand("encode", "Encode a token sequence");
  encode_cmd->add_option("--alpha", alpha, "Forgetting factor")->required();
  encode_cmd->add_option("--vocab", vocab_list, "Comma-separated vocabulary")->required();
  encode_cmd->add_flag("--reverse", reverse, "Encode right to left");
  encode_cmd->add_option("tokens", tokens, "Tokens");
  std::vector<double> values;
  double epsilon = kDecodeEpsilon;
  auto* decode_cmd = inspect_cmd->add_subcommand("decode", "Recover the sequence of a code");
  decode_cmd->add_option("--alpha", alpha, "Forgetting factor")->required();
  decode_cmd->add_option("--vocab", vocab_list, "Comma-separated vocabulary")->required();
  decode_cmd->add_option("--epsilon", epsilon, "Tolerance");
  decode_cmd->add_option("values", values, "Code components in vocabulary order")->required();
  std::size_t vocab_size = 2, max_len = 4;
  auto* unique_cmd = inspect_cmd->add_subcommand("unique", "Exhaustive collision search");
  unique_cmd->add_option("--alpha", alpha, "Forgetting factor")->required();
  unique_cmd->add_option("--vocab-size", vocab_size, "Alphabet size")->check(CLI::PositiveNumber);
  unique_cmd->add_option("--max-len", max_len, "Longest sequence");

  // make-synthetic
  auto* synth_cmd = app.add_subcommand("make-synthetic", "Write the toy corpus");
  std::string synth_dir;
  std::uint64_t synth_seed = 7;
  std::size_t synth_dim = 16;
  synth_cmd->add_option("--out", synth_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_option("--dim", synth_dim, "Embedding width")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      return app.exit(e, out, err);
    }
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*train_cmd) {
      RunConfig config = train_opts.resolve();
      TrainResult result = run_training(config, quiet ? nullptr : &out, &err);
      err << "best epoch " << result.best_epoch << ", dev f1 " << shortest(result.best_f1)
          << '\n';
      if (!config.model_path.empty()) err << "model written to " << config.model_path << '\n';
      if (!config.test_path.empty() && !config.model_path.empty()) {
        NerModel model = NerModel::load(config.model_path);
        Corpus test = load_corpus(config.test_path, model.settings().tokenization);
        auto predicted = model.tag(test.sentences);
        err << "test f1 " << shortest(evaluate(predicted, test.gold).f1()) << '\n';
      }
    } else if (*show_cmd) {
      out << to_config_text(show_opts.resolve());
    } else if (*eval_cmd) {
      NerModel model = NerModel::load(eval_model);
      if (eval_threshold) model.settings().threshold = *eval_threshold;
      std::vector<std::string> repairs;
      Corpus test = load_corpus(eval_test, model.settings().tokenization, &repairs);
      for (const auto& r : repairs) err << "bio repair: " << r << '\n';
      auto predicted = model.tag(test.sentences);
      print_scores(out, evaluate(predicted, test.gold));
    } else if (*tag_cmd) {
      NerModel model = NerModel::load(tag_model);
      if (tag_threshold) model.settings().threshold = *tag_threshold;
      std::ifstream file;
      std::istream* src = &in;
      if (tag_input != "-") {
        file.open(tag_input);
        if (!file) throw InvalidArgument("cannot open " + tag_input);
        src = &file;
      }
      bool more = true;
      for (std::size_t doc = 0; more; ++doc) {
        auto sentences = read_raw_document(*src, model.settings().tokenization, &more);
        if (sentences.empty()) break;
        for (const auto& span : model.tag(sentences)) {
          out << 'd' << doc << '\t' << span.sentence << '\t' << span.start << '\t'
              << span.end << '\t' << span.label << '\t' << std::fixed << std::setprecision(6)
              << span.probability << '\n';
        }
      }
    } else if (*inspect_cmd) {
      auto vocab = Vocabulary(split_commas(vocab_list));
      const std::size_t declared = vocab.size() - 1;
      ForgettingFactor a(alpha);
      if (*encode_cmd) {
        auto code = reverse ? encode_reversed(tokens, vocab, a) : encode(tokens, vocab, a);
        // Only declared tokens are shown; the unknown slot is reported when used.
        for (std::size_t i = 0; i < declared; ++i) {
          out << (i ? " " : "") << shortest(code.values[i]);
        }
        out << '\n';
        if (code.values[vocab.unknown_index()] != 0.0) {
          err << "unknown-token component " << shortest(code.values[vocab.unknown_index()])
              << '\n';
        }
      } else if (*decode_cmd) {
        if (values.size() != declared) {
          throw DimensionMismatch("expected " + std::to_string(declared) + " values, got " +
                                  std::to_string(values.size()));
        }
        FofeCode code{values, a, 0};
        code.values.push_back(0.0);
        auto decoded = decode(code, vocab, epsilon);
        for (std::size_t i = 0; i < decoded.size(); ++i) out << (i ? " " : "") << decoded[i];
        out << '\n';
      } else if (*unique_cmd) {
        auto report = uniqueness_check(vocab_size, max_len, a);
        out << "sequences " << report.total_sequences << " collisions "
            << report.collisions.size() << '\n';
        auto show = [&out](const std::vector<std::size_t>& seq) {
          out << '[';
          for (std::size_t i = 0; i < seq.size(); ++i) out << (i ? "," : "") << seq[i];
          out << ']';
        };
        for (const auto& [x, y] : report.collisions) {
          show(x);
          out << " == ";
          show(y);
          out << '\n';
        }
      }
    } else if (*synth_cmd) {
      write_synthetic(synth_dir, synth_seed, synth_dim);
      out << "wrote synthetic corpus to " << synth_dir << '\n';
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace fofe_ner
