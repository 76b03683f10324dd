#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dtrn {

// Dense n-dimensional array of doubles, row-major. The universal value
// carrier for images, feature columns, activations and parameters.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_[axis]; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& operator()(std::size_t i, std::size_t j) {
    assert(rank() == 2);
    return data_[i * shape_[1] + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    assert(rank() == 2);
    return data_[i * shape_[1] + j];
  }
  double& operator()(std::size_t c, std::size_t y, std::size_t x) {
    assert(rank() == 3);
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  double operator()(std::size_t c, std::size_t y, std::size_t x) const {
    assert(rank() == 3);
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  double& operator()(std::size_t o, std::size_t c, std::size_t y, std::size_t x) {
    assert(rank() == 4);
    return data_[((o * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }
  double operator()(std::size_t o, std::size_t c, std::size_t y, std::size_t x) const {
    assert(rank() == 4);
    return data_[((o * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }

  // Row i of a rank-2 tensor, contiguous.
  std::span<double> row(std::size_t i) {
    assert(rank() == 2 && i < shape_[0]);
    return {data_.data() + i * shape_[1], shape_[1]};
  }
  std::span<const double> row(std::size_t i) const {
    assert(rank() == 2 && i < shape_[0]);
    return {data_.data() + i * shape_[1], shape_[1]};
  }

  void fill(double value);
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  std::string shape_string() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// Seed-deterministic generator. mt19937_64 plus explicit value mappings so
// identical seeds yield identical draws on every platform (the standard
// library's distributions are implementation-defined and must not be used).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal via Box-Muller; the paired draw is cached.
  double gaussian();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_int(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Per-parameter velocity buffers for momentum SGD. Velocity shapes mirror
// the parameter shapes exactly; learning_rate > 0, momentum in [0, 1).
struct OptimizerState {
  double learning_rate = 1e-4;
  double momentum = 0.9;
  std::vector<Tensor> velocity;

  static OptimizerState create(const std::vector<Tensor*>& params, double learning_rate,
                               double momentum);
};

// ---- Kernel operations -----------------------------------------------------

// Valid cross-correlation, stride 1, no padding:
//   out[o,y,x] = bias[o] + sum_{c,i,j} input[c,y+i,x+j] * kernels[o,c,i,j]
// input [C_in,H,W], kernels [C_out,C_in,kH,kW], bias [C_out]
// -> out [C_out,H-kH+1,W-kW+1].
Tensor conv_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias);

// Gradient w.r.t. the input of conv_forward. in_h/in_w are the forward
// input's spatial extents.
Tensor conv_backward_input(const Tensor& grad_out, const Tensor& kernels, std::size_t in_h,
                           std::size_t in_w);

// Accumulates kernel and bias gradients into grad_kernels/grad_bias
// (shapes must already match the forward kernels/bias).
void conv_backward_params(const Tensor& input, const Tensor& grad_out, Tensor& grad_kernels,
                          Tensor& grad_bias);

// Point-wise maximum over groups of group_size consecutive channels.
// argmax records the winning input channel per output element for the
// backward pass; ties go to the lowest-index channel.
struct MaxoutResult {
  Tensor output;                     // [C/group_size, H, W]
  std::vector<std::uint32_t> argmax; // input channel index per output element
};
MaxoutResult maxout(const Tensor& input, std::size_t group_size);

// Routes each output gradient entirely to its argmax input element.
Tensor maxout_backward(const Tensor& grad_out, const std::vector<std::uint32_t>& argmax,
                       std::size_t in_channels);

// Overflow-safe softmax over a flat vector of logits.
Tensor softmax(const Tensor& logits);
void softmax_inplace(std::span<double> values);

// ln(sum_i exp(v_i)); -inf is the log-domain zero and an empty list maps
// to it. Overflow-safe via max subtraction.
double log_sum_exp(std::span<const double> values);
double log_sum_exp(double a, double b);

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// v <- momentum * v - learning_rate * g;  w <- w + v  (elementwise).
void sgd_momentum_step(Tensor& params, const Tensor& grads, Tensor& velocity,
                       double learning_rate, double momentum);

// Applies the update to a parameter list against state.velocity, index by index.
void sgd_momentum_step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
                       OptimizerState& state);

// Uniform draws from [-s, s], s = sqrt(6 / (fan_in + fan_out)).
Tensor random_init(const std::vector<std::size_t>& shape, std::size_t fan_in,
                   std::size_t fan_out, Rng& rng);

// Fan rule by rank: rank 4 (conv kernels) uses C_in*kH*kW / C_out*kH*kW,
// rank 2 uses cols / rows, rank 1 uses n / n.
Tensor random_init(const std::vector<std::size_t>& shape, Rng& rng);

}  // namespace dtrn
