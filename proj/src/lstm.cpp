#include "dtrn/lstm.hpp"

#include <cmath>

#include "dtrn/error.hpp"
#include "dtrn/gemm.hpp"

namespace dtrn {

namespace {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_direction(const LstmConfig& config, const LstmDirection& dir) {
  const std::size_t rows = 4 * config.hidden;
  if (dir.Wx.rank() != 2 || dir.Wx.extent(0) != rows || dir.Wx.extent(1) != config.input_dim ||
      dir.Wh.rank() != 2 || dir.Wh.extent(0) != rows || dir.Wh.extent(1) != config.hidden ||
      dir.b.rank() != 1 || dir.b.extent(0) != rows) {
    throw ValidationError("lstm direction tensor shapes do not match the configuration");
  }
}

}  // namespace

LstmParams LstmParams::init(const LstmConfig& config, Rng& rng) {
  LstmParams params;
  params.config = config;
  const std::size_t rows = 4 * config.hidden;
  for (LstmDirection* dir : {&params.fwd, &params.bwd}) {
    dir->Wx = random_init({rows, config.input_dim}, rng);
    dir->Wh = random_init({rows, config.hidden}, rng);
    dir->b = Tensor({rows});
    // Forget-gate bias starts at +1 so early memory survives.
    for (std::size_t i = config.hidden; i < 2 * config.hidden; ++i) dir->b[i] = 1.0;
  }
  params.Wo = random_init({config.classes, 2 * config.hidden}, rng);
  params.bo = Tensor({config.classes});
  return params;
}

LstmParams LstmParams::zeros(const LstmConfig& config) {
  LstmParams params;
  params.config = config;
  const std::size_t rows = 4 * config.hidden;
  for (LstmDirection* dir : {&params.fwd, &params.bwd}) {
    dir->Wx = Tensor({rows, config.input_dim});
    dir->Wh = Tensor({rows, config.hidden});
    dir->b = Tensor({rows});
  }
  params.Wo = Tensor({config.classes, 2 * config.hidden});
  params.bo = Tensor({config.classes});
  return params;
}

std::vector<Tensor*> LstmParams::tensors() {
  return {&fwd.Wx, &fwd.Wh, &fwd.b, &bwd.Wx, &bwd.Wh, &bwd.b, &Wo, &bo};
}

std::vector<const Tensor*> LstmParams::tensors() const {
  return {&fwd.Wx, &fwd.Wh, &fwd.b, &bwd.Wx, &bwd.Wh, &bwd.b, &Wo, &bo};
}

std::vector<std::string> LstmParams::tensor_names() {
  return {"rnn.fwd.Wx", "rnn.fwd.Wh", "rnn.fwd.b", "rnn.bwd.Wx",
          "rnn.bwd.Wh", "rnn.bwd.b",  "rnn.out.W", "rnn.out.b"};
}

std::size_t count_parameters(const LstmParams& params) {
  std::size_t count = 0;
  for (const Tensor* t : params.tensors()) count += t->size();
  return count;
}

LstmState lstm_step(const LstmDirection& dir, const LstmState& state,
                    std::span<const double> x) {
  const std::size_t hidden = state.h.size();
  if (dir.Wx.extent(1) != x.size() || dir.Wh.extent(1) != hidden ||
      dir.Wx.extent(0) != 4 * hidden) {
    throw ValidationError("lstm_step: input/state/parameter shapes disagree");
  }
  std::vector<double> pre(4 * hidden);
  matvec(4 * hidden, x.size(), dir.Wx.data(), x.data(), pre.data());
  matvec(4 * hidden, hidden, dir.Wh.data(), state.h.data(), pre.data(), true);
  for (std::size_t i = 0; i < 4 * hidden; ++i) pre[i] += dir.b[i];

  LstmState next(hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double gi = logistic(pre[j]);
    const double gf = logistic(pre[hidden + j]);
    const double gg = std::tanh(pre[2 * hidden + j]);
    const double go = logistic(pre[3 * hidden + j]);
    next.c[j] = gf * state.c[j] + gi * gg;
    next.h[j] = go * std::tanh(next.c[j]);
  }
  return next;
}

namespace {

// Runs one direction across the sequence. `reverse` walks the columns from
// the end; outputs are stored at the original time indices either way.
void run_direction(const LstmDirection& dir, const FeatureSequence& seq, bool reverse,
                   Tensor& gates, Tensor& cell, Tensor& tanh_cell, Tensor& hidden_out) {
  const std::size_t len = seq.length();
  const std::size_t hidden = dir.Wh.extent(1);
  const std::size_t rows = 4 * hidden;

  // Input projections for all steps in one multiply: XP[T,4H] = X * Wx^T.
  static thread_local std::vector<double> xp;
  xp.resize(len * rows);
  gemm_nt(len, rows, seq.dim(), seq.columns.data(), dir.Wx.data(), xp.data());

  std::vector<double> h(hidden, 0.0);
  std::vector<double> c(hidden, 0.0);
  std::vector<double> pre(rows);
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t t = reverse ? len - 1 - step : step;
    for (std::size_t i = 0; i < rows; ++i) pre[i] = xp[t * rows + i] + dir.b[i];
    matvec(rows, hidden, dir.Wh.data(), h.data(), pre.data(), true);

    double* gate_row = gates.data() + t * rows;
    double* cell_row = cell.data() + t * hidden;
    double* tanh_row = tanh_cell.data() + t * hidden;
    double* h_row = hidden_out.data() + t * hidden;
    for (std::size_t j = 0; j < hidden; ++j) {
      const double gi = logistic(pre[j]);
      const double gf = logistic(pre[hidden + j]);
      const double gg = std::tanh(pre[2 * hidden + j]);
      const double go = logistic(pre[3 * hidden + j]);
      const double cj = gf * c[j] + gi * gg;
      const double tc = std::tanh(cj);
      gate_row[j] = gi;
      gate_row[hidden + j] = gf;
      gate_row[2 * hidden + j] = gg;
      gate_row[3 * hidden + j] = go;
      cell_row[j] = cj;
      tanh_row[j] = tc;
      h_row[j] = go * tc;
      c[j] = cj;
      h[j] = h_row[j];
    }
  }
}

}  // namespace

BilstmTrace bilstmforward_trace_impl(const LstmParams& params, const FeatureSequence& seq) {
  const std::size_t len = seq.length();
  if (len == 0) throw ValidationError("bilstm_forward: empty sequence");
  if (seq.dim() != params.config.input_dim) {
    throw ValidationError("bilstm_forward: feature dimension " + std::to_string(seq.dim()) +
                          " does not match the model's " +
                          std::to_string(params.config.input_dim));
  }
  check_direction(params.config, params.fwd);
  check_direction(params.config, params.bwd);

  const std::size_t hidden = params.config.hidden;
  const std::size_t classes = params.config.classes;

  BilstmTrace trace{Tensor({len, 4 * hidden}), Tensor({len, 4 * hidden}),
                    Tensor({len, hidden}),     Tensor({len, hidden}),
                    Tensor({len, hidden}),     Tensor({len, hidden}),
                    Tensor({len, hidden}),     Tensor({len, hidden}),
                    Tensor({len, 2 * hidden}), Tensor({len, classes}),
                    PosteriorSequence{Tensor({len, classes})}};

  run_direction(params.fwd, seq, false, trace.gates_fwd, trace.cell_fwd, trace.tanh_cell_fwd,
                trace.hidden_fwd);
  run_direction(params.bwd, seq, true, trace.gates_bwd, trace.cell_bwd, trace.tanh_cell_bwd,
                trace.hidden_bwd);

  for (std::size_t t = 0; t < len; ++t) {
    double* row = trace.concat.data() + t * 2 * hidden;
    const double* hf = trace.hidden_fwd.data() + t * hidden;
    const double* hb = trace.hidden_bwd.data() + t * hidden;
    for (std::size_t j = 0; j < hidden; ++j) row[j] = hf[j];
    for (std::size_t j = 0; j < hidden; ++j) row[hidden + j] = hb[j];
  }

  gemm_nt(len, classes, 2 * hidden, trace.concat.data(), params.Wo.data(), trace.logits.data());
  for (std::size_t t = 0; t < len; ++t) {
    double* lrow = trace.logits.data() + t * classes;
    double* prow = trace.posteriors.rows.data() + t * classes;
    for (std::size_t k = 0; k < classes; ++k) prow[k] = lrow[k] + params.bo[k];
    for (std::size_t k = 0; k < classes; ++k) lrow[k] = prow[k];
    softmax_inplace({prow, classes});
  }
  return trace;
}

BilstmTrace bilstm_forward_trace(const LstmParams& params, const FeatureSequence& seq) {
  return bilstmforward_trace_impl(params, seq);
}

PosteriorSequence bilstm_forward(const LstmParams& params, const FeatureSequence& seq) {
  return bilstmforward_trace_impl(params, seq).posteriors;
}

namespace {

// BPTT through one direction; accumulates into the matching gradient
// tensors and consumes this direction's half of d(concat).
void backward_direction(const LstmDirection& dir, const FeatureSequence& seq, bool reverse,
                        const Tensor& gates, const Tensor& cell, const Tensor& tanh_cell,
                        const Tensor& hidden_out, const Tensor& grad_concat,
                        std::size_t concat_offset, LstmDirection& grad) {
  const std::size_t len = seq.length();
  const std::size_t hidden = dir.Wh.extent(1);
  const std::size_t rows = 4 * hidden;
  const std::size_t concat_width = grad_concat.extent(1);

  Tensor grad_pre({len, rows});         // d(loss)/d(gate pre-activations)
  std::vector<double> dh(hidden, 0.0);  // carried from the later step
  std::vector<double> dc(hidden, 0.0);

  for (std::size_t step = 0; step < len; ++step) {
    // Walk time in the reverse of this direction's forward order.
    const std::size_t t = reverse ? step : len - 1 - step;
    const double* gate_row = gates.data() + t * rows;
    const double* cell_row = cell.data() + t * hidden;
    const double* tanh_row = tanh_cell.data() + t * hidden;
    const double* gc = grad_concat.data() + t * concat_width + concat_offset;
    double* dpre = grad_pre.data() + t * rows;

    // Previous cell along this direction's forward order.
    const bool has_prev = reverse ? (t + 1 < len) : (t > 0);
    const std::size_t prev_t = reverse ? t + 1 : t - 1;
    const double* prev_cell = has_prev ? cell.data() + prev_t * hidden : nullptr;

    for (std::size_t j = 0; j < hidden; ++j) {
      const double gi = gate_row[j];
      const double gf = gate_row[hidden + j];
      const double gg = gate_row[2 * hidden + j];
      const double go = gate_row[3 * hidden + j];
      const double tc = tanh_row[j];

      const double dhj = gc[j] + dh[j];
      const double dcj = dc[j] + dhj * go * (1.0 - tc * tc);
      const double c_prev = prev_cell ? prev_cell[j] : 0.0;

      dpre[j] = dcj * gg * gi * (1.0 - gi);
      dpre[hidden + j] = dcj * c_prev * gf * (1.0 - gf);
      dpre[2 * hidden + j] = dcj * gi * (1.0 - gg * gg);
      dpre[3 * hidden + j] = dhj * tc * go * (1.0 - go);
      dc[j] = dcj * gf;
    }
    // dh for the earlier step: Wh^T * dpre.
    matvec_t(rows, hidden, dir.Wh.data(), dpre, dh.data());
    (void)cell_row;
  }

  // Weight gradients in two multiplies: dWx += dPre^T X, dWh += dPre^T Hprev.
  gemm_tn(rows, seq.dim(), len, grad_pre.data(), seq.columns.data(), grad.Wx.data(), true);

  static thread_local std::vector<double> h_prev;
  h_prev.assign(len * hidden, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    const bool has_prev = reverse ? (t + 1 < len) : (t > 0);
    if (!has_prev) continue;
    const std::size_t prev_t = reverse ? t + 1 : t - 1;
    const double* src = hidden_out.data() + prev_t * hidden;
    std::copy(src, src + hidden, h_prev.data() + t * hidden);
  }
  gemm_tn(rows, hidden, len, grad_pre.data(), h_prev.data(), grad.Wh.data(), true);

  for (std::size_t t = 0; t < len; ++t) {
    const double* dpre = grad_pre.data() + t * rows;
    for (std::size_t i = 0; i < rows; ++i) grad.b[i] += dpre[i];
  }
}

}  // namespace

LstmParams rnn_backward_from_trace(const LstmParams& params, const FeatureSequence& seq,
                                   const BilstmTrace& trace, const Tensor& grad_logits) {
  const std::size_t len = seq.length();
  const std::size_t hidden = params.config.hidden;
  const std::size_t classes = params.config.classes;
  if (grad_logits.rank() != 2 || grad_logits.extent(0) != len ||
      grad_logits.extent(1) != classes) {
    throw ValidationError("rnn_backward: gradient rows must be [T, classes], got " +
                          grad_logits.shape_string());
  }

  LstmParams grads = LstmParams::zeros(params.config);

  // Output layer: dWo = dLogits^T concat, dbo = column sums,
  // dConcat = dLogits Wo.
  gemm_tn(classes, 2 * hidden, len, grad_logits.data(), trace.concat.data(), grads.Wo.data(),
          true);
  for (std::size_t t = 0; t < len; ++t) {
    const double* row = grad_logits.data() + t * classes;
    for (std::size_t k = 0; k < classes; ++k) grads.bo[k] += row[k];
  }
  Tensor grad_concat({len, 2 * hidden});
  gemm_nn(len, 2 * hidden, classes, grad_logits.data(), params.Wo.data(), grad_concat.data());

  backward_direction(params.fwd, seq, false, trace.gates_fwd, trace.cell_fwd,
                     trace.tanh_cell_fwd, trace.hidden_fwd, grad_concat, 0, grads.fwd);
  backward_direction(params.bwd, seq, true, trace.gates_bwd, trace.cell_bwd,
                     trace.tanh_cell_bwd, trace.hidden_bwd, grad_concat, hidden, grads.bwd);
  return grads;
}

LstmParams rnn_backward(const LstmParams& params, const FeatureSequence& seq,
                        const Tensor& grad_logits) {
  BilstmTrace trace = bilstm_forward_trace(params, seq);
  return rnn_backward_from_trace(params, seq, trace, grad_logits);
}

}  // namespace dtrn
