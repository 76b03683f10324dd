#include "dtrn/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <thread>

#include "dtrn/alphabet.hpp"
#include "dtrn/checkpoint.hpp"
#include "dtrn/ctc.hpp"
#include "dtrn/error.hpp"
#include "dtrn/eval.hpp"
#include "dtrn/model_io.hpp"

namespace fs = std::filesystem;

namespace dtrn {

namespace {

std::vector<std::string> read_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open word list");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') words.push_back(line);
  }
  return words;
}

std::string resolve(const std::string& manifest_path, const std::string& relative) {
  const fs::path p(relative);
  if (p.is_absolute()) return relative;
  return (fs::path(manifest_path).parent_path() / p).string();
}

// Center 32 columns of a normalized word image, as a 1x32x32 tensor.
Tensor window_from_image(const WordImage& image) {
  Tensor window({1, WordImage::kHeight, WordImage::kHeight});
  const std::size_t x0 = (image.width - WordImage::kHeight) / 2;
  for (std::size_t y = 0; y < WordImage::kHeight; ++y) {
    for (std::size_t x = 0; x < WordImage::kHeight; ++x) {
      window(0, y, x) = image.at(y, x0 + x);
    }
  }
  return window;
}

}  // namespace

int cmd_synth(const SynthOptions& options) {
  SynthConfig config;
  config.seed = options.seed;
  config.word_source = options.words_path;
  config.words = read_word_list(options.words_path);
  config.samples_per_word = options.per_word;
  config.noise_sigma = options.noise_sigma;
  config.contrast_min = options.contrast_min;
  config.contrast_max = options.contrast_max;
  config.glyph_jitter = options.glyph_jitter;
  config.spacing_min = options.spacing_min;
  config.spacing_max = options.spacing_max;

  const SynthSummary summary = synth_generate(config, options.out_dir);
  std::printf("words %zu\n", summary.word_images);
  std::printf("chars %zu\n", summary.char_crops);
  std::printf("width_min %zu\n", summary.min_width);
  std::printf("width_max %zu\n", summary.max_width);
  std::printf("words_manifest %s\n", summary.words_manifest.c_str());
  std::printf("chars_manifest %s\n", summary.chars_manifest.c_str());
  return kExitOk;
}

int cmd_train_cnn(const TrainCnnOptions& options) {
  const auto entries = load_manifest(options.manifest);
  if (entries.empty()) throw ValidationError("train-cnn: empty manifest");

  std::vector<Tensor> windows;
  std::vector<int> labels;
  windows.reserve(entries.size());
  labels.reserve(entries.size());
  for (const ManifestEntry& entry : entries) {
    if (entry.label.size() != 1) {
      throw ValidationError("train-cnn: label '" + entry.label +
                            "' is not a single character");
    }
    const Image raster = read_pgm(resolve(options.manifest, entry.image_path));
    windows.push_back(window_from_image(normalize_image(raster)));
    labels.push_back(*Alphabet::index_of(entry.label[0]));
  }
  std::printf("loaded %zu character crops\n", windows.size());

  Rng rng(options.seed);
  CnnParams params = CnnParams::init(CnnConfig::canonical(), rng);

  std::vector<std::size_t> indices(windows.size());
  std::iota(indices.begin(), indices.end(), 0);
  rng.shuffle(indices);
  const auto holdout_count = std::min(
      windows.size() > 1 ? windows.size() - 1 : 0,
      static_cast<std::size_t>(static_cast<double>(windows.size()) * options.holdout_fraction));
  const std::vector<std::size_t> holdout(indices.end() - static_cast<long>(holdout_count),
                                         indices.end());
  std::vector<std::size_t> train(indices.begin(),
                                 indices.end() - static_cast<long>(holdout_count));

  OptimizerState opt =
      OptimizerState::create(params.tensors(), options.learning_rate, options.momentum);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(train);
    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < train.size(); start += options.batch) {
      const std::size_t end = std::min(start + options.batch, train.size());
      std::vector<Tensor> batch;
      std::vector<int> batch_labels;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(windows[train[i]]);
        batch_labels.push_back(labels[train[i]]);
      }
      loss_sum += train_cnn_step(params, batch, batch_labels, opt);
      ++batches;
    }
    std::size_t correct = 0;
    for (std::size_t i : holdout) {
      if (classify_char(params, windows[i]).class_index == labels[i]) ++correct;
    }
    const double acc =
        holdout.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(holdout.size());
    std::printf("epoch %zu mean_loss %.4f holdout_acc %.4f\n", epoch,
                loss_sum / static_cast<double>(std::max<std::size_t>(batches, 1)), acc);
    std::fflush(stdout);
  }

  ModelCheckpoint checkpoint;
  add_cnn_tensors(checkpoint, params);
  checkpoint.save(options.out_path);
  std::printf("saved %s\n", options.out_path.c_str());
  return kExitOk;
}

namespace {

struct RnnSample {
  FeatureSequence features;
  LabelSequence label;
};

void write_holdout_manifest(const std::string& source_manifest,
                            const std::vector<ManifestEntry>& entries,
                            const std::vector<std::size_t>& holdout, const std::string& out_path) {
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError(out_path + ": cannot write holdout manifest");
  const fs::path source_dir = fs::path(source_manifest).parent_path();
  const fs::path out_dir = fs::path(out_path).parent_path();
  for (std::size_t i : holdout) {
    const ManifestEntry& entry = entries[i];
    fs::path image(entry.image_path);
    if (!image.is_absolute()) {
      image = (source_dir / image).lexically_normal();
      const fs::path rebased = image.lexically_proximate(out_dir.empty() ? "." : out_dir);
      image = rebased;
    }
    out << image.string() << '\t' << entry.label;
    if (entry.lexicon_path) out << '\t' << *entry.lexicon_path;
    out << '\n';
  }
}

}  // namespace

int cmd_train_rnn(const TrainRnnOptions& options) {
  const ModelCheckpoint cnn_checkpoint = ModelCheckpoint::load(options.cnn_checkpoint);
  const CnnParams cnn = load_cnn_tensors(cnn_checkpoint);

  const auto entries = load_manifest(options.manifest);
  if (entries.empty()) throw ValidationError("train-rnn: empty manifest");
  if (options.holdout >= entries.size()) {
    throw ValidationError("train-rnn: holdout size must be smaller than the dataset");
  }

  // The CNN is frozen, so every feature sequence is extracted once.
  std::vector<RnnSample> samples;
  samples.reserve(entries.size());
  for (const ManifestEntry& entry : entries) {
    const Image raster = read_pgm(resolve(options.manifest, entry.image_path));
    const WordImage word = normalize_image(raster);
    RnnSample sample{normalize_columns(extract_sequence(cnn, word)),
                     LabelSequence::from_string(entry.label)};
    samples.push_back(std::move(sample));
  }
  std::printf("extracted %zu feature sequences\n", samples.size());
  std::fflush(stdout);

  Rng rng(options.seed);
  LstmParams params = LstmParams::init(LstmConfig::canonical(), rng);

  std::vector<std::size_t> indices(samples.size());
  std::iota(indices.begin(), indices.end(), 0);
  rng.shuffle(indices);
  const std::vector<std::size_t> holdout(indices.end() - static_cast<long>(options.holdout),
                                         indices.end());
  std::vector<std::size_t> train(indices.begin(),
                                 indices.end() - static_cast<long>(options.holdout));
  if (!options.holdout_manifest.empty()) {
    write_holdout_manifest(options.manifest, entries, holdout, options.holdout_manifest);
  }

  OptimizerState opt =
      OptimizerState::create(params.tensors(), options.learning_rate, options.momentum);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(train);
    double loss_sum = 0;
    std::size_t updates = 0;
    std::size_t skipped = 0;
    for (std::size_t i : train) {
      const TrainStepResult result =
          train_rnn_step(params, samples[i].features, samples[i].label, opt, options.clip);
      if (result.skipped) {
        ++skipped;
      } else {
        loss_sum += result.loss;
        ++updates;
      }
    }
    const double mean_loss = updates ? loss_sum / static_cast<double>(updates) : 0.0;
    if (!holdout.empty() && options.eval_cadence > 0 &&
        ((epoch + 1) % options.eval_cadence == 0 || epoch + 1 == options.epochs)) {
      std::size_t exact = 0;
      for (std::size_t i : holdout) {
        if (best_path_decode(bilstm_forward(params, samples[i].features)) ==
            samples[i].label.text) {
          ++exact;
        }
      }
      std::printf("epoch %zu mean_ctc_loss %.4f holdout_exact %.4f skipped %zu\n", epoch,
                  mean_loss, static_cast<double>(exact) / static_cast<double>(holdout.size()),
                  skipped);
    } else {
      std::printf("epoch %zu mean_ctc_loss %.4f skipped %zu\n", epoch, mean_loss, skipped);
    }
    std::fflush(stdout);
  }

  ModelCheckpoint checkpoint;
  add_cnn_tensors(checkpoint, cnn);
  add_rnn_tensors(checkpoint, params);
  checkpoint.save(options.out_path);
  std::printf("saved %s\n", options.out_path.c_str());
  return kExitOk;
}

namespace {

std::string printable(const std::string& s) { return s.empty() ? "\"\"" : s; }

}  // namespace

int cmd_recognize(const RecognizeOptions& options) {
  const Recognizer recognizer = Recognizer::load(options.model);
  const WordImage image = normalize_image(read_pgm(options.image));
  const std::string raw = recognizer.recognize(image);
  if (options.lexicon.empty()) {
    std::printf("%s\n", printable(raw).c_str());
  } else {
    const Lexicon lexicon = Lexicon::load(options.lexicon);
    const LexiconMatch match = lexicon_decode(raw, lexicon);
    std::printf("%s\t%s\t%zu\n", printable(raw).c_str(), match.word.c_str(), match.distance);
  }
  return kExitOk;
}

int cmd_eval(const EvalOptionsCli& options) {
  const Recognizer recognizer = Recognizer::load(options.model);
  const auto entries = load_manifest(options.manifest);
  if (entries.empty()) throw ValidationError("eval: empty manifest");

  // Lexicons are loaded up front; per-sample lexicons override the shared one.
  std::map<std::string, std::unique_ptr<Lexicon>> lexicon_cache;
  std::unique_ptr<Lexicon> shared;
  if (!options.lexicon.empty()) shared = std::make_unique<Lexicon>(Lexicon::load(options.lexicon));
  std::vector<const Lexicon*> lexicons(entries.size(), shared.get());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].lexicon_path) continue;
    const std::string path = resolve(options.manifest, *entries[i].lexicon_path);
    auto it = lexicon_cache.find(path);
    if (it == lexicon_cache.end()) {
      it = lexicon_cache.emplace(path, std::make_unique<Lexicon>(Lexicon::load(path))).first;
    }
    lexicons[i] = it->second.get();
  }

  std::vector<EvalSample> samples(entries.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::max<std::size_t>(options.workers, 1);
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= entries.size()) break;
      EvalSample& sample = samples[i];
      sample.ground_truth = entries[i].label;
      sample.lexicon = lexicons[i];
      try {
        const WordImage image =
            normalize_image(read_pgm(resolve(options.manifest, entries[i].image_path)));
        sample.raw_decode = recognizer.recognize(image);
      } catch (const IoError& e) {
        std::fprintf(stderr, "warning: %s\n", e.what());
        sample.errored = true;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  EvalOptions eval_options;
  eval_options.skip_short_and_nonalnum = options.strict_protocol;
  const EvalReport report = evaluate(samples, eval_options);
  write_report(report, options.report_path);
  if (report.errored > 0) std::printf("errored %zu\n", report.errored);
  std::printf("accuracy %.4f\n", report.accuracy);
  return kExitOk;
}

}  // namespace dtrn
