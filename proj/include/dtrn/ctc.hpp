#pragma once

#include <span>
#include <string>
#include <vector>

#include "dtrn/cnn.hpp"
#include "dtrn/lstm.hpp"
#include "dtrn/tensor.hpp"

namespace dtrn {

// A target word as alphabet class indices; the blank never appears. A
// length-T path can represent it iff T >= size + adjacent-repeat count.
struct LabelSequence {
  std::vector<int> chars;
  std::string text;  // source string, for display

  static LabelSequence from_string(const std::string& word);

  std::size_t size() const { return chars.size(); }
  // Minimum path length: K plus the number of adjacent equal pairs.
  std::size_t min_frames() const;
  bool feasible(std::size_t frames) const { return frames >= min_frames(); }
};

// Forward/backward lattice over the blank-augmented label l' (length 2K+1).
// alpha[t][s] covers frames 1..t ending at state s (emission at t
// included); beta[t][s] covers the continuation after frame t. Their
// products therefore tile the total path probability at every frame.
struct CtcTables {
  std::vector<int> augmented;  // l', blanks interleaved
  Tensor alpha;                // [T, 2K+1], log domain
  Tensor beta;                 // [T, 2K+1], log domain
  double log_prob;             // ln P(label | posteriors), from the alphas

  // The same total recomputed through the betas at t = 0; agrees with
  // log_prob within 1e-9 on every well-formed instance.
  double backward_total() const;
};

// Merge maximal runs of equal symbols, then delete blanks; a blank
// separates repeats, so "-gg-o-oo-dd-" collapses to "good".
std::vector<int> collapse_path_ids(std::span<const int> path, int blank);
std::string collapse_path(std::span<const int> path, int blank = 36);

// Blank-augmented forward-backward alignment of a label against the
// posterior rows. The blank is the last class. Throws
// InfeasibleLabelError when no length-T path exists.
CtcTables ctc_forward_backward(const PosteriorSequence& posteriors, const LabelSequence& label);

// Negative log likelihood of the label: -ln P >= 0.
double ctc_loss(const PosteriorSequence& posteriors, const LabelSequence& label);

// Gradient with respect to the pre-softmax logits:
//   grad[t][k] = p_t(k) - sum_{s: l'_s = k} exp(alpha[t][s] + beta[t][s] - log_prob)
// The subtracted term forms a distribution over classes per row.
Tensor ctc_gradient(const PosteriorSequence& posteriors, const LabelSequence& label);

// Per-row argmax (ties to the lowest class) followed by the collapse.
std::string best_path_decode(const PosteriorSequence& posteriors);
std::vector<int> best_path_ids(const PosteriorSequence& posteriors);

struct TrainStepResult {
  double loss = 0.0;
  bool skipped = false;  // infeasible sample, no update applied
};

// One per-sequence update: forward, CTC loss/gradient, BPTT, elementwise
// gradient clip to [-clip, clip], then the momentum step. Infeasible
// samples are skipped with a warning on stderr.
TrainStepResult train_rnn_step(LstmParams& params, const FeatureSequence& seq,
                               const LabelSequence& label, OptimizerState& opt,
                               double clip = 10.0);

}  // namespace dtrn
