#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fofe_ner/cli.h"
#include "fofe_ner/config.h"
#include "fofe_ner/conll.h"
#include "fofe_ner/errors.h"
#include "fofe_ner/fofe.h"
#include "fofe_ner/model.h"
#include "fofe_ner/pipeline.h"
#include "fofe_ner/recipe.h"

namespace py = pybind11;
using namespace fofe_ner;

namespace {

using SpanTuple = std::tuple<std::size_t, std::size_t, std::size_t, std::string>;

std::vector<EntitySpan> to_spans(const std::vector<SpanTuple>& tuples) {
  std::vector<EntitySpan> out;
  for (const auto& [s, a, b, label] : tuples) out.push_back({s, a, b, label, 1.0});
  return out;
}

py::dict score_dict(const ClassScores& s) {
  py::dict d;
  d["precision"] = s.precision;
  d["recall"] = s.recall;
  d["f1"] = s.f1;
  d["correct"] = s.correct;
  d["predicted"] = s.predicted;
  d["gold"] = s.gold;
  return d;
}

std::vector<Sentence> to_sentences(const std::vector<std::vector<std::string>>& tokens) {
  std::vector<Sentence> out;
  for (const auto& t : tokens) out.emplace_back(t);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "FOFE span-based named entity recognition";
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def(
      "encode",
      [](const std::vector<std::string>& tokens, const std::vector<std::string>& vocab,
         double alpha, bool reverse) {
        Vocabulary v(vocab);
        ForgettingFactor a(alpha);
        auto code = reverse ? encode_reversed(tokens, v, a) : encode(tokens, v, a);
        return code.values;
      },
      py::arg("tokens"), py::arg("vocab"), py::arg("alpha"), py::arg("reverse") = false,
      "Dense code over `vocab` plus a trailing unknown-token component.");

  m.def(
      "decode",
      [](std::vector<double> values, const std::vector<std::string>& vocab, double alpha,
         double epsilon) {
        Vocabulary v(vocab);
        if (values.size() == vocab.size()) values.push_back(0.0);
        return decode(FofeCode{values, ForgettingFactor(alpha), 0}, v, epsilon);
      },
      py::arg("values"), py::arg("vocab"), py::arg("alpha"), py::arg("epsilon") = kDecodeEpsilon);

  m.def(
      "uniqueness_check",
      [](std::size_t vocab_size, std::size_t max_len, double alpha) {
        auto report = uniqueness_check(vocab_size, max_len, ForgettingFactor(alpha));
        return py::make_tuple(report.total_sequences, report.collisions);
      },
      py::arg("vocab_size"), py::arg("max_len"), py::arg("alpha"),
      "Returns (sequence count, list of colliding pairs).");

  m.def(
      "evaluate",
      [](const std::vector<SpanTuple>& predicted, const std::vector<SpanTuple>& gold) {
        Scores s = evaluate(to_spans(predicted), to_spans(gold));
        py::dict per_class;
        for (const auto& [name, cls] : s.per_class) per_class[py::str(name)] = score_dict(cls);
        py::dict out = score_dict(s.overall);
        out["per_class"] = per_class;
        return out;
      },
      py::arg("predicted"), py::arg("gold"),
      "Exact-match scores; spans are (sentence, start, end, label) tuples.");

  m.def(
      "parse_conll",
      [](const std::string& text) {
        std::istringstream in(text);
        py::list docs;
        for (const auto& doc : parse_conll(in)) {
          py::list sentences;
          for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
            std::vector<std::tuple<std::size_t, std::size_t, std::string>> spans;
            for (const auto& g : doc.gold[s]) spans.emplace_back(g.start, g.end, g.label);
            sentences.append(py::make_tuple(doc.sentences[s].tokens(), spans));
          }
          docs.append(sentences);
        }
        return docs;
      },
      py::arg("text"), "Documents as lists of (tokens, [(start, end, label)]).");

  m.def("profiles", [] {
    py::dict out;
    for (const auto& [name, p] : builtin_profiles()) {
      py::dict d;
      d["learning_rate"] = p.learning_rate;
      d["fragment_layers"] = p.fragment_layers;
      d["context_layers"] = p.context_layers;
      d["shared_layers"] = p.shared_layers;
      d["tokenization"] = p.tokenization == Tokenization::kCharacter ? "character" : "word";
      out[py::str(name)] = d;
    }
    return out;
  });

  m.def(
      "train",
      [](const std::string& config_path, const std::map<std::string, std::string>& overrides) {
        RunConfig config;
        read_config_file(config_path, config);
        for (const auto& [k, v] : overrides) config.set(k, v);
        std::ostringstream log;
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = run_training(config, &log);
        }
        py::dict out;
        out["best_epoch"] = r.best_epoch;
        out["best_f1"] = r.best_f1;
        out["log"] = log.str();
        return out;
      },
      py::arg("config_path"), py::arg("overrides") = std::map<std::string, std::string>{});

  py::class_<NerModel>(m, "Model")
      .def_static("load", py::overload_cast<const std::string&>(&NerModel::load), py::arg("path"))
      .def("save", py::overload_cast<const std::string&>(&NerModel::save, py::const_),
           py::arg("path"))
      .def_property_readonly("labels",
                             [](const NerModel& m) { return m.labels().entity_classes(); })
      .def_property(
          "threshold", [](const NerModel& m) { return m.settings().threshold; },
          [](NerModel& m, double t) { m.settings().threshold = t; })
      .def(
          "tag",
          [](const NerModel& m, const std::vector<std::vector<std::string>>& sentences) {
            std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::string, double>>
                out;
            for (const auto& s : m.tag(to_sentences(sentences))) {
              out.emplace_back(s.sentence, s.start, s.end, s.label, s.probability);
            }
            return out;
          },
          py::arg("sentences"),
          "Entity spans as (sentence, start, end, label, probability) tuples.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args, const std::string& input) {
        std::istringstream in(input);
        std::ostringstream out, err;
        int status = run_cli(args, in, out, err);
        return py::make_tuple(status, out.str(), err.str());
      },
      py::arg("args"), py::arg("input") = "", "Returns (exit status, stdout, stderr).");
}
