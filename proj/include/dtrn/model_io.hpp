#pragma once

#include <string>

#include "dtrn/checkpoint.hpp"
#include "dtrn/cnn.hpp"
#include "dtrn/eval.hpp"
#include "dtrn/lstm.hpp"

namespace dtrn {

// Canonical-architecture tensors <-> checkpoint entries. Loading validates
// every shape against the canonical configuration and reports tensors that
// are missing; unknown extra tensors are ignored with a warning on stderr.

void add_cnn_tensors(ModelCheckpoint& checkpoint, const CnnParams& params);
CnnParams load_cnn_tensors(const ModelCheckpoint& checkpoint);

void add_rnn_tensors(ModelCheckpoint& checkpoint, const LstmParams& params);
LstmParams load_rnn_tensors(const ModelCheckpoint& checkpoint);

void warn_unknown_tensors(const ModelCheckpoint& checkpoint,
                          const std::vector<std::string>& known);

// A full frozen pipeline: CNN feature sequencer plus bidirectional LSTM.
struct Recognizer {
  CnnParams cnn;
  LstmParams rnn;

  static Recognizer load(const std::string& checkpoint_path);

  // normalize_columns(extract_sequence(...)) -> posteriors -> best path.
  std::string recognize(const WordImage& image) const;
  PosteriorSequence posteriors(const WordImage& image) const;
};

}  // namespace dtrn
