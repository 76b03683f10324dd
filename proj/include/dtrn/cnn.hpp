#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "dtrn/image.hpp"
#include "dtrn/tensor.hpp"

namespace dtrn {

// Five valid convolutions, each followed by a maxout over channel groups.
// On a 32x32 window the canonical net produces spatial extents
// 24, 16, 8, 1, 1 and post-maxout channel counts 48, 64, 128, 128, 36;
// layer 4's 128 channels are the feature column, layer 5's 36 the
// character logits.
struct CnnLayerConfig {
  std::size_t pre_channels;  // channels before maxout
  std::size_t group;         // maxout group size
  std::size_t kernel;        // square kernel extent
};

struct CnnConfig {
  std::array<CnnLayerConfig, 5> layers;

  static CnnConfig canonical();
  // Same depth and kernels with channel counts scaled down; used by the
  // gradient-check suites.
  static CnnConfig reduced(std::size_t divisor);

  std::size_t post_channels(std::size_t layer) const {
    return layers[layer].pre_channels / layers[layer].group;
  }
  std::size_t num_classes() const { return post_channels(4); }
  std::size_t feature_dim() const { return post_channels(3); }
};

struct CnnLayer {
  Tensor kernels;  // [pre_channels, in_channels, k, k]
  Tensor bias;     // [pre_channels]
  std::size_t group = 1;
};

struct CnnParams {
  CnnConfig config;
  std::array<CnnLayer, 5> layers;

  static CnnParams init(const CnnConfig& config, Rng& rng);

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  // Checkpoint names: "cnn.layer1.kernels", "cnn.layer1.bias", ...
  static std::vector<std::string> tensor_names();

  std::size_t parameter_count() const;
};

// The ordered CNN feature sequence of a word image: T columns of
// feature_dim values, column t at horizontal window offset t.
struct FeatureSequence {
  Tensor columns;  // [T, dim]

  std::size_t length() const { return columns.rank() == 2 ? columns.extent(0) : 0; }
  std::size_t dim() const { return columns.rank() == 2 ? columns.extent(1) : 0; }
  std::span<double> column(std::size_t t) { return columns.row(t); }
  std::span<const double> column(std::size_t t) const { return columns.row(t); }
};

struct WindowOutput {
  Tensor char_logits;  // [num_classes], pre-softmax
  Tensor penultimate;  // [feature_dim], layer-4 output
};

// Runs one 32x32 window through all five layers.
WindowOutput cnn_forward_window(const CnnParams& params, const Tensor& window);

// Applies layers 1-4 across the whole height-32 image at once; column t of
// the result equals cnn_forward_window on the 32x32 crop at offset t.
// T = W - 31. Width below 32 is rejected (callers pad via normalize_image).
FeatureSequence extract_sequence(const CnnParams& params, const WordImage& image);

// Standardizes every column to zero mean and unit variance over its
// entries. Columns whose variance falls below 1e-16 (std below the 1e-8
// denominator floor) become all zeros.
FeatureSequence normalize_columns(const FeatureSequence& seq);

// One optimizer step of softmax cross-entropy on a batch of 32x32 windows.
// Returns the mean loss over the batch. Labels must lie in [0, num_classes).
double train_cnn_step(CnnParams& params, const std::vector<Tensor>& windows,
                      const std::vector<int>& labels, OptimizerState& opt);

// Mean cross-entropy of a batch without updating parameters (gradient
// checks and training diagnostics).
double cnn_batch_loss(const CnnParams& params, const std::vector<Tensor>& windows,
                      const std::vector<int>& labels);

struct CharPrediction {
  char character;     // alphabet member
  int class_index;    // argmax class, ties to the lowest index
  double confidence;  // softmax probability of the argmax
};

CharPrediction classify_char(const CnnParams& params, const Tensor& window);

}  // namespace dtrn
