#include "dtrn/ctc.hpp"

#include <cmath>
#include <cstdio>

#include "dtrn/alphabet.hpp"
#include "dtrn/error.hpp"

namespace dtrn {

LabelSequence LabelSequence::from_string(const std::string& word) {
  if (word.empty()) throw ValidationError("label string must be non-empty");
  LabelSequence label;
  label.text = Alphabet::fold(word);
  label.chars.reserve(label.text.size());
  for (char c : label.text) label.chars.push_back(*Alphabet::index_of(c));
  return label;
}

std::size_t LabelSequence::min_frames() const {
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < chars.size(); ++i) {
    if (chars[i] == chars[i - 1]) ++repeats;
  }
  return chars.size() + repeats;
}

std::vector<int> collapse_path_ids(std::span<const int> path, int blank) {
  std::vector<int> out;
  int previous = blank;
  for (int symbol : path) {
    if (symbol != previous && symbol != blank) out.push_back(symbol);
    previous = symbol;
  }
  return out;
}

std::string collapse_path(std::span<const int> path, int blank) {
  std::string out;
  for (int id : collapse_path_ids(path, blank)) out.push_back(Alphabet::char_at(id));
  return out;
}

namespace {

std::vector<int> augment_label(const LabelSequence& label, int blank) {
  std::vector<int> augmented;
  augmented.reserve(2 * label.size() + 1);
  augmented.push_back(blank);
  for (int c : label.chars) {
    augmented.push_back(c);
    augmented.push_back(blank);
  }
  return augmented;
}

void check_instance(const PosteriorSequence& posteriors, const LabelSequence& label) {
  const std::size_t frames = posteriors.length();
  const int classes = static_cast<int>(posteriors.classes());
  if (frames == 0 || classes < 2) {
    throw ValidationError("ctc: posteriors must be [T >= 1, classes >= 2]");
  }
  if (label.chars.empty()) throw ValidationError("ctc: empty label");
  for (int c : label.chars) {
    if (c < 0 || c >= classes - 1) {
      throw ValidationError("ctc: label index " + std::to_string(c) +
                            " outside [0, " + std::to_string(classes - 1) + ")");
    }
  }
  if (!label.feasible(frames)) {
    throw InfeasibleLabelError("label '" + label.text + "' needs at least " +
                               std::to_string(label.min_frames()) + " frames, sequence has " +
                               std::to_string(frames));
  }
}

inline double log_posterior(const PosteriorSequence& p, std::size_t t, int k) {
  const double v = p.rows.data()[t * p.classes() + static_cast<std::size_t>(k)];
  return v > 0 ? std::log(v) : kLogZero;
}

}  // namespace

double CtcTables::backward_total() const {
  const std::size_t states = augmented.size();
  double total = alpha.data()[0] + beta.data()[0];
  if (states > 1) total = log_sum_exp(total, alpha.data()[1] + beta.data()[1]);
  return total;
}

CtcTables ctc_forward_backward(const PosteriorSequence& posteriors, const LabelSequence& label) {
  check_instance(posteriors, label);
  const std::size_t frames = posteriors.length();
  const int blank = static_cast<int>(posteriors.classes()) - 1;

  CtcTables tables;
  tables.augmented = augment_label(label, blank);
  const std::size_t states = tables.augmented.size();
  const std::vector<int>& lp = tables.augmented;

  tables.alpha = Tensor({frames, states});
  tables.beta = Tensor({frames, states});
  tables.alpha.fill(kLogZero);
  tables.beta.fill(kLogZero);

  // A state may skip its predecessor's predecessor only when it is a
  // character differing from the one two states back.
  auto can_skip = [&](std::size_t s) {
    return s >= 2 && lp[s] != blank && lp[s] != lp[s - 2];
  };

  // Forward: paths start at the leading blank or the first character.
  tables.alpha(0, 0) = log_posterior(posteriors, 0, lp[0]);
  if (states > 1) tables.alpha(0, 1) = log_posterior(posteriors, 0, lp[1]);
  for (std::size_t t = 1; t < frames; ++t) {
    for (std::size_t s = 0; s < states; ++s) {
      double sum = tables.alpha(t - 1, s);
      if (s >= 1) sum = log_sum_exp(sum, tables.alpha(t - 1, s - 1));
      if (can_skip(s)) sum = log_sum_exp(sum, tables.alpha(t - 1, s - 2));
      if (sum != kLogZero) sum += log_posterior(posteriors, t, lp[s]);
      tables.alpha(t, s) = sum;
    }
  }

  // Backward: continuations after the final frame from the last two states
  // have probability one.
  tables.beta(frames - 1, states - 1) = 0.0;
  if (states > 1) tables.beta(frames - 1, states - 2) = 0.0;
  for (std::size_t t = frames - 1; t-- > 0;) {
    for (std::size_t s = 0; s < states; ++s) {
      double sum = tables.beta(t + 1, s) + log_posterior(posteriors, t + 1, lp[s]);
      if (s + 1 < states) {
        sum = log_sum_exp(sum, tables.beta(t + 1, s + 1) + log_posterior(posteriors, t + 1,
                                                                         lp[s + 1]));
      }
      if (s + 2 < states && can_skip(s + 2)) {
        sum = log_sum_exp(sum, tables.beta(t + 1, s + 2) + log_posterior(posteriors, t + 1,
                                                                         lp[s + 2]));
      }
      tables.beta(t, s) = sum;
    }
  }

  double total = tables.alpha(frames - 1, states - 1);
  if (states > 1) total = log_sum_exp(total, tables.alpha(frames - 1, states - 2));
  tables.log_prob = total;
  return tables;
}

double ctc_loss(const PosteriorSequence& posteriors, const LabelSequence& label) {
  const CtcTables tables = ctc_forward_backward(posteriors, label);
  return -tables.log_prob;
}

Tensor ctc_gradient(const PosteriorSequence& posteriors, const LabelSequence& label) {
  const CtcTables tables = ctc_forward_backward(posteriors, label);
  const std::size_t frames = posteriors.length();
  const std::size_t classes = posteriors.classes();
  const std::size_t states = tables.augmented.size();
  if (tables.log_prob == kLogZero) {
    throw std::runtime_error("ctc_gradient: total path probability underflowed to zero");
  }

  Tensor grad({frames, classes});
  std::vector<double> occupancy(classes);
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(occupancy.begin(), occupancy.end(), kLogZero);
    for (std::size_t s = 0; s < states; ++s) {
      const auto k = static_cast<std::size_t>(tables.augmented[s]);
      occupancy[k] = log_sum_exp(occupancy[k], tables.alpha(t, s) + tables.beta(t, s));
    }
    const double* p = posteriors.rows.data() + t * classes;
    double* g = grad.data() + t * classes;
    for (std::size_t k = 0; k < classes; ++k) {
      const double target =
          occupancy[k] == kLogZero ? 0.0 : std::exp(occupancy[k] - tables.log_prob);
      g[k] = p[k] - target;
    }
  }
  return grad;
}

std::vector<int> best_path_ids(const PosteriorSequence& posteriors) {
  const std::size_t classes = posteriors.classes();
  std::vector<int> path(posteriors.length());
  for (std::size_t t = 0; t < posteriors.length(); ++t) {
    const double* row = posteriors.rows.data() + t * classes;
    std::size_t best = 0;
    for (std::size_t k = 1; k < classes; ++k) {
      if (row[k] > row[best]) best = k;
    }
    path[t] = static_cast<int>(best);
  }
  return path;
}

std::string best_path_decode(const PosteriorSequence& posteriors) {
  const std::vector<int> path = best_path_ids(posteriors);
  return collapse_path(path, static_cast<int>(posteriors.classes()) - 1);
}

TrainStepResult train_rnn_step(LstmParams& params, const FeatureSequence& seq,
                               const LabelSequence& label, OptimizerState& opt, double clip) {
  if (!label.feasible(seq.length())) {
    std::fprintf(stderr, "warning: skipping infeasible sample '%s' (needs %zu frames, has %zu)\n",
                 label.text.c_str(), label.min_frames(), seq.length());
    return TrainStepResult{0.0, true};
  }

  BilstmTrace trace = bilstm_forward_trace(params, seq);
  const CtcTables tables = ctc_forward_backward(trace.posteriors, label);
  Tensor grad_logits = ctc_gradient(trace.posteriors, label);
  LstmParams grads = rnn_backward_from_trace(params, seq, trace, grad_logits);

  if (clip > 0) {
    for (Tensor* g : grads.tensors()) {
      for (double& v : g->flat()) v = std::clamp(v, -clip, clip);
    }
  }
  sgd_momentum_step(params.tensors(), grads.tensors(), opt);
  return TrainStepResult{-tables.log_prob, false};
}

}  // namespace dtrn
