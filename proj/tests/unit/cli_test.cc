#include <filesystem>
#include <fstream>
#include <sstream>

#include "fofe_ner/cli.h"
#include "gtest/gtest.h"

using namespace fofe_ner;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  int status = run_cli(args, in, out, err);
  return {status, out.str(), err.str()};
}

std::string value_of(const std::string& config_text, const std::string& key) {
  std::istringstream in(config_text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
  }
  return "<missing>";
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fofe_ner_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, EncodeExample) {
  auto r = run({"fofe-inspect", "encode", "--alpha", "0.5", "--vocab", "A,B,C", "A", "B", "A"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "1.25 0.5 0\n");
  EXPECT_EQ(r.err, "");
}

TEST(Cli, EncodeReportsUnknownTokens) {
  auto r = run({"fofe-inspect", "encode", "--alpha", "0.5", "--vocab", "A,B", "Z", "A"});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "1 0\n");
  EXPECT_NE(r.err.find("0.5"), std::string::npos);
}

TEST(Cli, ReverseEncode) {
  auto r = run({"fofe-inspect", "encode", "--alpha", "0.5", "--vocab", "A,B,C", "--reverse",
                "A", "B", "C"});
  EXPECT_EQ(r.out, "1 0.5 0.25\n");
}

TEST(Cli, DecodeExample) {
  auto r = run({"fofe-inspect", "decode", "--alpha", "0.5", "--vocab", "A,B,C", "1.25", "0.5",
                "0"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "A B A\n");
  auto bad = run({"fofe-inspect", "decode", "--alpha", "0.5", "--vocab", "A,B,C", "0.7", "0",
                  "0"});
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.err.find("error:"), std::string::npos);
}

TEST(Cli, UniqueAtGoldenRatio) {
  auto r = run({"fofe-inspect", "unique", "--alpha", "0.6180339887498949", "--vocab-size", "2",
                "--max-len", "3"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "sequences 15 collisions 1");
  auto clean = run({"fofe-inspect", "unique", "--alpha", "0.5", "--vocab-size", "3",
                    "--max-len", "4"});
  EXPECT_NE(clean.out.find("collisions 0"), std::string::npos);
}

TEST(Cli, ProfilesResolve) {
  auto conll = run({"show-config", "--profile", "conll2003"});
  EXPECT_EQ(conll.status, 0) << conll.err;
  EXPECT_EQ(value_of(conll.out, "learning_rate"), "0.256");
  EXPECT_EQ(value_of(conll.out, "fragment_layers"), "412,412");
  EXPECT_EQ(value_of(conll.out, "context_layers"), "512,512");
  EXPECT_EQ(value_of(conll.out, "shared_layers"), "512");

  auto spa = run({"show-config", "--profile", "kbp-spa"});
  EXPECT_EQ(value_of(spa.out, "learning_rate"), "0.064");
  EXPECT_EQ(value_of(spa.out, "fragment_layers"), "412,412");
  EXPECT_EQ(value_of(spa.out, "context_layers"), "412,412");
  EXPECT_EQ(value_of(spa.out, "shared_layers"), "512");
}

TEST(Cli, FlagsOverrideConfigOverrideProfile) {
  auto dir = scratch("precedence");
  std::ofstream(dir / "run.cfg") << "learning_rate = 0.01\nbatch_size = 7\ntrain = t.conll\n";
  auto cfg = (dir / "run.cfg").string();
  auto r = run({"show-config", "--profile", "kbp-eng", "--config", cfg, "--batch_size", "9"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(value_of(r.out, "learning_rate"), "0.01");
  EXPECT_EQ(value_of(r.out, "batch_size"), "9");
  EXPECT_EQ(value_of(r.out, "context_layers"), "412,412,412");
  EXPECT_EQ(value_of(r.out, "train"), (dir / "t.conll").string());
}

TEST(Cli, ErrorsExitNonZero) {
  EXPECT_EQ(run({}).status, 1);
  EXPECT_EQ(run({"no-such-command"}).status, 1);
  auto r = run({"show-config", "--profile", "conll1999"});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  EXPECT_EQ(run({"show-config", "--learning_rate", "fast"}).status, 1);
  EXPECT_EQ(run({"eval", "--model", "/nonexistent", "--test", "/nonexistent"}).status, 1);
  EXPECT_EQ(run({"train"}).status, 1);
  EXPECT_EQ(run({"fofe-inspect", "encode", "--alpha", "1.5", "--vocab", "A", "A"}).status, 1);
}

TEST(Cli, TrainEvalTagOnSyntheticCorpus) {
  auto dir = scratch("pipeline");
  ASSERT_EQ(run({"make-synthetic", "--out", dir.string()}).status, 0);
  auto model = (dir / "model.bin").string();
  auto log = (dir / "train.log").string();
  auto trained = run({"train", "--config", (dir / "synthetic.cfg").string(), "--max_epochs", "3",
                      "--model", model, "--log", log, "--quiet"});
  ASSERT_EQ(trained.status, 0) << trained.err;
  EXPECT_EQ(trained.out, "");
  EXPECT_NE(trained.err.find("model written to"), std::string::npos);
  ASSERT_TRUE(std::filesystem::exists(model));
  std::ifstream log_in(log);
  std::string header;
  std::getline(log_in, header);
  EXPECT_EQ(header, "epoch\tloss\tlr\tdev_p\tdev_r\tdev_f1");

  auto eval = run({"eval", "--model", model, "--test", (dir / "heldout.conll").string()});
  ASSERT_EQ(eval.status, 0) << eval.err;
  EXPECT_EQ(eval.out.rfind("class\tprecision\trecall\tf1\tcorrect\tpredicted\tgold\n", 0), 0u);
  EXPECT_NE(eval.out.find("\noverall\t"), std::string::npos);

  auto tagged = run({"tag", "--model", model, "--threshold", "0"},
                    "John Smith lives in Paris\n\nMary visited Rome\n");
  ASSERT_EQ(tagged.status, 0) << tagged.err;
  std::istringstream lines(tagged.out);
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    ++count;
    EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 5) << line;
    EXPECT_EQ(line[0], 'd');
  }
  EXPECT_GT(count, 0u);
}
