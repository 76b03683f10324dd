#include <cstdio>
#include <exception>

#include <CLI11.hpp>

#include "dtrn/commands.hpp"
#include "dtrn/error.hpp"

namespace {

int dispatch(CLI::App& app, int argc, char** argv) {
  dtrn::SynthOptions synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic word-image corpus");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--words", synth.words_path, "Word list file, one word per line")
      ->required();
  synth_cmd->add_option("--per-word", synth.per_word, "Renderings per word");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--noise", synth.noise_sigma, "Gaussian noise sigma, in [0, 0.3]");
  synth_cmd->add_option("--contrast-min", synth.contrast_min, "Contrast jitter lower bound");
  synth_cmd->add_option("--contrast-max", synth.contrast_max, "Contrast jitter upper bound");
  synth_cmd->add_option("--jitter", synth.glyph_jitter, "Per-glyph horizontal jitter, pixels");
  synth_cmd->add_option("--spacing-min", synth.spacing_min, "Minimum glyph gap, pixels");
  synth_cmd->add_option("--spacing-max", synth.spacing_max, "Maximum glyph gap, pixels");

  dtrn::TrainCnnOptions train_cnn;
  CLI::App* train_cnn_cmd =
      app.add_subcommand("train-cnn", "Train the character CNN on 32x32 crops");
  train_cnn_cmd->add_option("--data", train_cnn.manifest, "Character crop manifest (chars.tsv)")
      ->required();
  train_cnn_cmd->add_option("--out", train_cnn.out_path, "Checkpoint to write")->required();
  train_cnn_cmd->add_option("--epochs", train_cnn.epochs, "Training epochs");
  train_cnn_cmd->add_option("--batch", train_cnn.batch, "Windows per optimizer step");
  train_cnn_cmd->add_option("--lr", train_cnn.learning_rate, "Learning rate");
  train_cnn_cmd->add_option("--momentum", train_cnn.momentum, "Momentum");
  train_cnn_cmd->add_option("--holdout-frac", train_cnn.holdout_fraction,
                            "Held-out fraction for accuracy logging");
  train_cnn_cmd->add_option("--seed", train_cnn.seed, "Init/shuffle seed");

  dtrn::TrainRnnOptions train_rnn;
  CLI::App* train_rnn_cmd =
      app.add_subcommand("train-rnn", "Train the bidirectional LSTM with the CTC objective");
  train_rnn_cmd->add_option("--data", train_rnn.manifest, "Word-image manifest (words.tsv)")
      ->required();
  train_rnn_cmd->add_option("--cnn", train_rnn.cnn_checkpoint, "Frozen CNN checkpoint")
      ->required();
  train_rnn_cmd->add_option("--out", train_rnn.out_path, "Combined checkpoint to write")
      ->required();
  train_rnn_cmd->add_option("--epochs", train_rnn.epochs, "Training epochs");
  train_rnn_cmd->add_option("--holdout", train_rnn.holdout, "Held-out image count");
  train_rnn_cmd->add_option("--holdout-manifest", train_rnn.holdout_manifest,
                            "Write the held-out split as a manifest");
  train_rnn_cmd->add_option("--lr", train_rnn.learning_rate, "Learning rate");
  train_rnn_cmd->add_option("--momentum", train_rnn.momentum, "Momentum");
  train_rnn_cmd->add_option("--clip", train_rnn.clip, "Elementwise gradient clip bound");
  train_rnn_cmd->add_option("--seed", train_rnn.seed, "Init/shuffle seed");
  train_rnn_cmd->add_option("--eval-cadence", train_rnn.eval_cadence,
                            "Held-out decode every N epochs");

  dtrn::RecognizeOptions recognize;
  CLI::App* recognize_cmd = app.add_subcommand("recognize", "Recognize one word image");
  recognize_cmd->add_option("--model", recognize.model, "Model checkpoint")->required();
  recognize_cmd->add_option("--image", recognize.image, "PGM word image")->required();
  recognize_cmd->add_option("--lexicon", recognize.lexicon, "Optional lexicon for correction");

  dtrn::EvalOptionsCli eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a dataset manifest");
  eval_cmd->add_option("--model", eval.model, "Model checkpoint")->required();
  eval_cmd->add_option("--data", eval.manifest, "Dataset manifest")->required();
  eval_cmd->add_option("--lexicon", eval.lexicon, "Shared lexicon (per-sample ones win)");
  eval_cmd->add_option("--report", eval.report_path, "TSV report path");
  eval_cmd->add_option("--workers", eval.workers, "Decoding worker threads");
  eval_cmd->add_flag("--strict-protocol", eval.strict_protocol,
                     "Skip ground truths under 3 chars or with non-alphanumerics");

  app.require_subcommand(1);
  app.parse(argc, argv);

  if (*synth_cmd) return dtrn::cmd_synth(synth);
  if (*train_cnn_cmd) return dtrn::cmd_train_cnn(train_cnn);
  if (*train_rnn_cmd) return dtrn::cmd_train_rnn(train_rnn);
  if (*recognize_cmd) return dtrn::cmd_recognize(recognize);
  return dtrn::cmd_eval(eval);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dtrn: word-image recognition with a Maxout CNN, bidirectional LSTM and CTC"};
  try {
    return dispatch(app, argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return dtrn::kExitUsage;
  } catch (const dtrn::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return dtrn::kExitIo;
  } catch (const dtrn::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return dtrn::kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return dtrn::kExitValidation;
  }
}
