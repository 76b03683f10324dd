#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dtrn/cnn.hpp"
#include "dtrn/tensor.hpp"

namespace dtrn {

struct LstmConfig {
  std::size_t input_dim = 128;
  std::size_t hidden = 128;   // memory cells per direction
  std::size_t classes = 37;   // 36 characters + blank

  static LstmConfig canonical() { return LstmConfig{}; }
};

// One direction's weights. Gate rows are packed [input; forget; candidate;
// output], each `hidden` rows — the ordering is fixed for checkpoint
// portability.
struct LstmDirection {
  Tensor Wx;  // [4*hidden, input_dim]
  Tensor Wh;  // [4*hidden, hidden]
  Tensor b;   // [4*hidden]
};

struct LstmParams {
  LstmConfig config;
  LstmDirection fwd;
  LstmDirection bwd;
  Tensor Wo;  // [classes, 2*hidden]
  Tensor bo;  // [classes]

  // Random fan-based weights; biases zero except the forget gate's +1.
  static LstmParams init(const LstmConfig& config, Rng& rng);
  static LstmParams zeros(const LstmConfig& config);

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  // "rnn.fwd.Wx", "rnn.fwd.Wh", "rnn.fwd.b", same for bwd, "rnn.out.W",
  // "rnn.out.b" — matching tensors() order.
  static std::vector<std::string> tensor_names();
};

// Hidden output and cell memory of one direction. Every entry of h lies
// in (-1, 1) by construction (logistic gate times tanh).
struct LstmState {
  std::vector<double> h;
  std::vector<double> c;

  explicit LstmState(std::size_t hidden) : h(hidden, 0.0), c(hidden, 0.0) {}
};

// One gated update: i,f,o = logistic, g = tanh of the packed pre-activations;
// c' = f*c + i*g; h' = o*tanh(c').
LstmState lstm_step(const LstmDirection& dir, const LstmState& state,
                    std::span<const double> x);

// T rows of class probability distributions; each row sums to 1.
struct PosteriorSequence {
  Tensor rows;  // [T, classes]

  std::size_t length() const { return rows.rank() == 2 ? rows.extent(0) : 0; }
  std::size_t classes() const { return rows.rank() == 2 ? rows.extent(1) : 0; }
  std::span<double> row(std::size_t t) { return rows.row(t); }
  std::span<const double> row(std::size_t t) const { return rows.row(t); }
};

// Forward pass over columns 1..T and backward pass over T..1 from zero
// initial states; per step the two hidden vectors are concatenated
// (forward first), affinely mapped to `classes` logits and softmaxed.
PosteriorSequence bilstm_forward(const LstmParams& params, const FeatureSequence& seq);

// Full activation record of one bidirectional pass, kept for BPTT.
struct BilstmTrace {
  Tensor gates_fwd, gates_bwd;    // [T, 4H] post-activation i,f,g,o
  Tensor cell_fwd, cell_bwd;      // [T, H]
  Tensor tanh_cell_fwd, tanh_cell_bwd;
  Tensor hidden_fwd, hidden_bwd;  // [T, H]
  Tensor concat;                  // [T, 2H]
  Tensor logits;                  // [T, classes]
  PosteriorSequence posteriors;
};

BilstmTrace bilstm_forward_trace(const LstmParams& params, const FeatureSequence& seq);

// Reverse-mode gradients of all parameter tensors given d(loss)/d(logits)
// per row; reuses a recorded trace.
LstmParams rnn_backward_from_trace(const LstmParams& params, const FeatureSequence& seq,
                                   const BilstmTrace& trace, const Tensor& grad_logits);

// Convenience wrapper that recomputes the forward trace internally.
LstmParams rnn_backward(const LstmParams& params, const FeatureSequence& seq,
                        const Tensor& grad_logits);

// Total scalar parameter count; 272,677 for the canonical configuration.
std::size_t count_parameters(const LstmParams& params);

}  // namespace dtrn
