#include "dtrn/cnn.hpp"

#include <cmath>

#include "dtrn/alphabet.hpp"
#include "dtrn/error.hpp"

namespace dtrn {

CnnConfig CnnConfig::canonical() {
  // Kernels 9,9,9,8,1 collapse a 32x32 window to 1x1 by layer 4 with no
  // pooling; maxout groups 2,2,2,2,4 leave 48, 64, 128, 128, 36 channels.
  return CnnConfig{{{{96, 2, 9}, {128, 2, 9}, {256, 2, 9}, {256, 2, 8}, {144, 4, 1}}}};
}

CnnConfig CnnConfig::reduced(std::size_t divisor) {
  CnnConfig config = canonical();
  for (std::size_t l = 0; l < 4; ++l) {
    config.layers[l].pre_channels =
        std::max<std::size_t>(config.layers[l].pre_channels / divisor, config.layers[l].group);
  }
  // Keep layer 5's group of 4; its class count shrinks with the divisor.
  config.layers[4].pre_channels =
      std::max<std::size_t>(144 / divisor / 4 * 4, 4);
  return config;
}

CnnParams CnnParams::init(const CnnConfig& config, Rng& rng) {
  CnnParams params;
  params.config = config;
  std::size_t in_channels = 1;
  for (std::size_t l = 0; l < 5; ++l) {
    const CnnLayerConfig& layer = config.layers[l];
    params.layers[l].kernels =
        random_init({layer.pre_channels, in_channels, layer.kernel, layer.kernel}, rng);
    params.layers[l].bias = Tensor({layer.pre_channels});
    params.layers[l].group = layer.group;
    in_channels = config.post_channels(l);
  }
  return params;
}

std::vector<Tensor*> CnnParams::tensors() {
  std::vector<Tensor*> out;
  for (CnnLayer& layer : layers) {
    out.push_back(&layer.kernels);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<const Tensor*> CnnParams::tensors() const {
  std::vector<const Tensor*> out;
  for (const CnnLayer& layer : layers) {
    out.push_back(&layer.kernels);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<std::string> CnnParams::tensor_names() {
  std::vector<std::string> names;
  for (int l = 1; l <= 5; ++l) {
    names.push_back("cnn.layer" + std::to_string(l) + ".kernels");
    names.push_back("cnn.layer" + std::to_string(l) + ".bias");
  }
  return names;
}

std::size_t CnnParams::parameter_count() const {
  std::size_t count = 0;
  for (const CnnLayer& layer : layers) count += layer.kernels.size() + layer.bias.size();
  return count;
}

namespace {

struct LayerTrace {
  Tensor input;                      // layer input [C,H,W]
  Tensor pre;                        // conv output before maxout
  std::vector<std::uint32_t> argmax; // maxout routing
};

// Forward through layers [first, last]; optionally records traces for the
// backward pass.
Tensor run_layers(const CnnParams& params, Tensor x, std::size_t first, std::size_t last,
                  std::vector<LayerTrace>* traces) {
  for (std::size_t l = first; l <= last; ++l) {
    const CnnLayer& layer = params.layers[l];
    Tensor pre = conv_forward(x, layer.kernels, layer.bias);
    MaxoutResult mo = maxout(pre, layer.group);
    if (traces) {
      (*traces)[l] = LayerTrace{std::move(x), std::move(pre), std::move(mo.argmax)};
    }
    x = std::move(mo.output);
  }
  return x;
}

void check_window(const Tensor& window) {
  if (window.rank() != 3 || window.extent(0) != 1 || window.extent(1) != 32 ||
      window.extent(2) != 32) {
    throw ValidationError("cnn window must be 1x32x32, got " + window.shape_string());
  }
}

}  // namespace

WindowOutput cnn_forward_window(const CnnParams& params, const Tensor& window) {
  check_window(window);
  Tensor penultimate = run_layers(params, window, 0, 3, nullptr);  // [dim,1,1]
  Tensor logits = run_layers(params, penultimate, 4, 4, nullptr);  // [classes,1,1]

  WindowOutput out{Tensor({params.config.num_classes()}), Tensor({params.config.feature_dim()})};
  std::copy(logits.flat().begin(), logits.flat().end(), out.char_logits.flat().begin());
  std::copy(penultimate.flat().begin(), penultimate.flat().end(), out.penultimate.flat().begin());
  return out;
}

FeatureSequence extract_sequence(const CnnParams& params, const WordImage& image) {
  if (image.width < WordImage::kHeight) {
    throw ValidationError("extract_sequence: image width " + std::to_string(image.width) +
                          " below 32; pad via normalize_image first");
  }
  Tensor x({1, WordImage::kHeight, image.width});
  std::copy(image.pixels.begin(), image.pixels.end(), x.flat().begin());

  // Layers 1-4 over the full width: valid convolutions compose, so column t
  // of the [dim, 1, W-31] output equals the per-window result at offset t.
  Tensor features = run_layers(params, std::move(x), 0, 3, nullptr);

  const std::size_t dim = features.extent(0);
  const std::size_t len = features.extent(2);
  FeatureSequence seq{Tensor({len, dim})};
  for (std::size_t c = 0; c < dim; ++c) {
    const double* src = features.data() + c * len;
    for (std::size_t t = 0; t < len; ++t) seq.columns(t, c) = src[t];
  }
  return seq;
}

FeatureSequence normalize_columns(const FeatureSequence& seq) {
  FeatureSequence out = seq;
  const std::size_t dim = out.dim();
  if (dim == 0) return out;
  for (std::size_t t = 0; t < out.length(); ++t) {
    std::span<double> col = out.column(t);
    double mean = 0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(dim);
    double var = 0;
    for (double v : col) var += (v - mean) * (v - mean);
    var /= static_cast<double>(dim);
    const double std_dev = std::sqrt(var);
    if (std_dev < 1e-8) {
      for (double& v : col) v = 0.0;
    } else {
      for (double& v : col) v = (v - mean) / std_dev;
    }
  }
  return out;
}

namespace {

// Backward through all five layers for one window given d(loss)/d(logits).
void backward_window(const CnnParams& params, const std::vector<LayerTrace>& traces,
                     const Tensor& grad_logits, CnnParams& grads) {
  Tensor grad({params.config.num_classes(), 1, 1});
  std::copy(grad_logits.flat().begin(), grad_logits.flat().end(), grad.flat().begin());

  for (std::size_t l = 5; l-- > 0;) {
    const LayerTrace& trace = traces[l];
    Tensor grad_pre =
        maxout_backward(grad, trace.argmax, params.layers[l].kernels.extent(0));
    conv_backward_params(trace.input, grad_pre, grads.layers[l].kernels, grads.layers[l].bias);
    if (l > 0) {
      grad = conv_backward_input(grad_pre, params.layers[l].kernels, trace.input.extent(1),
                                 trace.input.extent(2));
    }
  }
}

CnnParams zero_like(const CnnParams& params) {
  CnnParams zeros;
  zeros.config = params.config;
  for (std::size_t l = 0; l < 5; ++l) {
    zeros.layers[l].kernels = Tensor(params.layers[l].kernels.shape());
    zeros.layers[l].bias = Tensor(params.layers[l].bias.shape());
    zeros.layers[l].group = params.layers[l].group;
  }
  return zeros;
}

}  // namespace

double train_cnn_step(CnnParams& params, const std::vector<Tensor>& windows,
                      const std::vector<int>& labels, OptimizerState& opt) {
  if (windows.empty() || windows.size() != labels.size()) {
    throw ValidationError("train_cnn_step: batch of windows and labels must match");
  }
  const int num_classes = static_cast<int>(params.config.num_classes());
  for (int label : labels) {
    if (label < 0 || label >= num_classes) {
      throw ValidationError("train_cnn_step: label " + std::to_string(label) +
                            " outside [0, " + std::to_string(num_classes) + ")");
    }
  }

  CnnParams grads = zero_like(params);
  const double inv_batch = 1.0 / static_cast<double>(windows.size());
  double loss = 0;

  std::vector<LayerTrace> traces(5);
  for (std::size_t b = 0; b < windows.size(); ++b) {
    check_window(windows[b]);
    Tensor logits3 = run_layers(params, windows[b], 0, 4, &traces);
    Tensor probs({static_cast<std::size_t>(num_classes)});
    std::copy(logits3.flat().begin(), logits3.flat().end(), probs.flat().begin());
    softmax_inplace(probs.flat());

    loss -= std::log(std::max(probs[static_cast<std::size_t>(labels[b])], 1e-300)) * inv_batch;

    Tensor grad_logits = probs;  // softmax - onehot, scaled by 1/batch
    grad_logits[static_cast<std::size_t>(labels[b])] -= 1.0;
    for (double& g : grad_logits.flat()) g *= inv_batch;
    backward_window(params, traces, grad_logits, grads);
  }

  sgd_momentum_step(params.tensors(), grads.tensors(), opt);
  return loss;
}

double cnn_batch_loss(const CnnParams& params, const std::vector<Tensor>& windows,
                      const std::vector<int>& labels) {
  double loss = 0;
  for (std::size_t b = 0; b < windows.size(); ++b) {
    WindowOutput out = cnn_forward_window(params, windows[b]);
    Tensor probs = softmax(out.char_logits);
    loss -= std::log(std::max(probs[static_cast<std::size_t>(labels[b])], 1e-300));
  }
  return loss / static_cast<double>(windows.size());
}

CharPrediction classify_char(const CnnParams& params, const Tensor& window) {
  WindowOutput out = cnn_forward_window(params, window);
  Tensor probs = softmax(out.char_logits);
  std::size_t best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k) {
    if (probs[k] > probs[best]) best = k;  // ties keep the lowest index
  }
  const int index = static_cast<int>(best);
  const char c = index < Alphabet::kNumChars ? Alphabet::char_at(index) : '?';
  return CharPrediction{c, index, probs[best]};
}

}  // namespace dtrn
