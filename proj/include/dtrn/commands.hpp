#pragma once

#include <cstdint>
#include <string>

#include "dtrn/data.hpp"

namespace dtrn {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitValidation = 3;

struct SynthOptions {
  std::string out_dir;
  std::string words_path;
  std::size_t per_word = 20;
  std::uint64_t seed = 0;
  double noise_sigma = 0.05;
  double contrast_min = 0.5;
  double contrast_max = 0.9;
  std::size_t glyph_jitter = 1;
  std::size_t spacing_min = 1;
  std::size_t spacing_max = 3;
};

struct TrainCnnOptions {
  std::string manifest;  // single-character crops
  std::string out_path;
  std::size_t epochs = 3;
  std::size_t batch = 16;
  double learning_rate = 1e-4;
  double momentum = 0.9;
  double holdout_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct TrainRnnOptions {
  std::string manifest;  // word images
  std::string cnn_checkpoint;
  std::string out_path;
  std::string holdout_manifest;  // optional: write the held-out split
  std::size_t epochs = 10;
  std::size_t holdout = 0;
  double learning_rate = 1e-4;
  double momentum = 0.9;
  double clip = 10.0;
  std::uint64_t seed = 0;
  std::size_t eval_cadence = 1;  // held-out decode every N epochs
};

struct RecognizeOptions {
  std::string model;
  std::string image;
  std::string lexicon;  // optional
};

struct EvalOptionsCli {
  std::string model;
  std::string manifest;
  std::string lexicon;  // optional shared lexicon
  std::string report_path = "eval_report.tsv";
  std::size_t workers = 1;
  bool strict_protocol = false;  // skip short/non-alphanumeric ground truths
};

int cmd_synth(const SynthOptions& options);
int cmd_train_cnn(const TrainCnnOptions& options);
int cmd_train_rnn(const TrainRnnOptions& options);
int cmd_recognize(const RecognizeOptions& options);
int cmd_eval(const EvalOptionsCli& options);

}  // namespace dtrn
