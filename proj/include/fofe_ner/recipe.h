#ifndef FOFE_NER_RECIPE_H_
#define FOFE_NER_RECIPE_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "fofe_ner/config.h"
#include "fofe_ner/model.h"
#include "fofe_ner/pipeline.h"
#include "fofe_ner/trainer.h"

namespace fofe_ner {

// One class name per line; blank lines and '#' comments are ignored.
std::vector<std::string> read_labels(const std::string& path);

// Sorted distinct classes of the gold spans.
std::vector<std::string> derive_labels(const Corpus& corpus);

// Reads a column-format file and applies the tokenization mode.
Corpus load_corpus(const std::string& path, Tokenization tokenization,
                   std::vector<std::string>* repairs = nullptr);

// Fresh model for `config`. Word vocabulary comes from the embedding file
// when one is configured (plus any training token it lacks), otherwise from
// the training tokens with random rows. `vocab_corpora` limits the file
// vocabulary when restrict_vocab is set.
NerModel build_model(const RunConfig& config, const LabelSet& labels, const Corpus& train,
                     const std::vector<const Corpus*>& vocab_corpora);

// The `train` command: load data, build, train, save the model when a path is
// configured. Epoch records go to `log` and to the configured log file.
TrainResult run_training(const RunConfig& config, std::ostream* log = nullptr,
                         std::ostream* info = nullptr);

}  // namespace fofe_ner

#endif  // FOFE_NER_RECIPE_H_
