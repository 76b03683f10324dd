#include "dtrn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dtrn/error.hpp"
#include "dtrn/gemm.hpp"

namespace dtrn {

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  std::size_t count = 1;
  for (std::size_t extent : shape_) {
    if (extent == 0) throw ValidationError("tensor extents must be positive");
    count *= extent;
  }
  data_.assign(count, 0.0);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw ValidationError("uniform_int: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw >= limit);
  return draw % n;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

OptimizerState OptimizerState::create(const std::vector<Tensor*>& params, double learning_rate,
                                      double momentum) {
  if (learning_rate <= 0) throw ValidationError("learning_rate must be positive");
  if (momentum < 0 || momentum >= 1) throw ValidationError("momentum must lie in [0, 1)");
  OptimizerState state;
  state.learning_rate = learning_rate;
  state.momentum = momentum;
  state.velocity.reserve(params.size());
  for (const Tensor* p : params) state.velocity.emplace_back(p->shape());
  return state;
}

// ---- convolution -----------------------------------------------------------

namespace {

void check_conv_shapes(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
  if (input.rank() != 3 || kernels.rank() != 4 || bias.rank() != 1) {
    throw ValidationError("conv_forward: expected input [C,H,W], kernels [O,C,kH,kW], bias [O]");
  }
  if (kernels.extent(1) != input.extent(0)) {
    throw ValidationError("conv_forward: kernel input channels " +
                          std::to_string(kernels.extent(1)) + " do not match input channels " +
                          std::to_string(input.extent(0)));
  }
  if (kernels.extent(2) > input.extent(1) || kernels.extent(3) > input.extent(2)) {
    throw ValidationError("conv_forward: kernel " + kernels.shape_string() +
                          " larger than input " + input.shape_string());
  }
  if (bias.extent(0) != kernels.extent(0)) {
    throw ValidationError("conv_forward: bias length does not match output channels");
  }
}

// cols[(c*kh+i)*kw+j][y*ow+x] = input[c, y+i, x+j]
void im2col(const Tensor& input, std::size_t kh, std::size_t kw, std::size_t oh, std::size_t ow,
            std::vector<double>& cols) {
  const std::size_t cin = input.extent(0);
  const std::size_t w = input.extent(2);
  cols.resize(cin * kh * kw * oh * ow);
  double* dst = cols.data();
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t i = 0; i < kh; ++i) {
      for (std::size_t j = 0; j < kw; ++j) {
        const double* src = input.data() + (c * input.extent(1) + i) * w + j;
        for (std::size_t y = 0; y < oh; ++y) {
          const double* srow = src + y * w;
          for (std::size_t x = 0; x < ow; ++x) *dst++ = srow[x];
        }
      }
    }
  }
}

}  // namespace

Tensor conv_forward(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
  check_conv_shapes(input, kernels, bias);
  const std::size_t cout = kernels.extent(0);
  const std::size_t kh = kernels.extent(2);
  const std::size_t kw = kernels.extent(3);
  const std::size_t oh = input.extent(1) - kh + 1;
  const std::size_t ow = input.extent(2) - kw + 1;

  Tensor out({cout, oh, ow});
  const std::size_t kdim = input.extent(0) * kh * kw;
  const std::size_t n = oh * ow;

  if (kh == 1 && kw == 1) {
    // 1x1: the input already is the column matrix.
    gemm_nn(cout, n, kdim, kernels.data(), input.data(), out.data());
  } else {
    static thread_local std::vector<double> cols;
    im2col(input, kh, kw, oh, ow, cols);
    gemm_nn(cout, n, kdim, kernels.data(), cols.data(), out.data());
  }
  for (std::size_t o = 0; o < cout; ++o) {
    double* row = out.data() + o * n;
    const double b = bias[o];
    for (std::size_t i = 0; i < n; ++i) row[i] += b;
  }
  return out;
}

Tensor conv_backward_input(const Tensor& grad_out, const Tensor& kernels, std::size_t in_h,
                           std::size_t in_w) {
  const std::size_t cout = kernels.extent(0);
  const std::size_t cin = kernels.extent(1);
  const std::size_t kh = kernels.extent(2);
  const std::size_t kw = kernels.extent(3);
  const std::size_t oh = grad_out.extent(1);
  const std::size_t ow = grad_out.extent(2);
  if (grad_out.extent(0) != cout || oh != in_h - kh + 1 || ow != in_w - kw + 1) {
    throw ValidationError("conv_backward_input: gradient shape does not match geometry");
  }

  Tensor grad_in({cin, in_h, in_w});
  const std::size_t kdim = cin * kh * kw;
  const std::size_t n = oh * ow;

  // cols_grad = K^T * dOut, then scatter-add back to image positions.
  static thread_local std::vector<double> cols_grad;
  cols_grad.resize(kdim * n);
  gemm_tn(kdim, n, cout, kernels.data(), grad_out.data(), cols_grad.data());

  const double* src = cols_grad.data();
  for (std::size_t c = 0; c < cin; ++c) {
    for (std::size_t i = 0; i < kh; ++i) {
      for (std::size_t j = 0; j < kw; ++j) {
        double* dst = grad_in.data() + (c * in_h + i) * in_w + j;
        for (std::size_t y = 0; y < oh; ++y) {
          double* drow = dst + y * in_w;
          for (std::size_t x = 0; x < ow; ++x) drow[x] += src[x];
          src += ow;
        }
      }
    }
  }
  return grad_in;
}

void conv_backward_params(const Tensor& input, const Tensor& grad_out, Tensor& grad_kernels,
                          Tensor& grad_bias) {
  const std::size_t cout = grad_out.extent(0);
  const std::size_t kh = grad_kernels.extent(2);
  const std::size_t kw = grad_kernels.extent(3);
  const std::size_t oh = grad_out.extent(1);
  const std::size_t ow = grad_out.extent(2);
  const std::size_t kdim = input.extent(0) * kh * kw;
  const std::size_t n = oh * ow;

  if (kh == 1 && kw == 1) {
    gemm_nt(cout, kdim, n, grad_out.data(), input.data(), grad_kernels.data(), true);
  } else {
    static thread_local std::vector<double> cols;
    im2col(input, kh, kw, oh, ow, cols);
    gemm_nt(cout, kdim, n, grad_out.data(), cols.data(), grad_kernels.data(), true);
  }
  for (std::size_t o = 0; o < cout; ++o) {
    const double* row = grad_out.data() + o * n;
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += row[i];
    grad_bias[o] += acc;
  }
}

// ---- maxout ----------------------------------------------------------------

MaxoutResult maxout(const Tensor& input, std::size_t group_size) {
  if (input.rank() != 3) throw ValidationError("maxout: expected input [C,H,W]");
  const std::size_t channels = input.extent(0);
  if (group_size == 0 || channels % group_size != 0) {
    throw ValidationError("maxout: " + std::to_string(channels) +
                          " channels not divisible by group size " + std::to_string(group_size));
  }
  const std::size_t out_channels = channels / group_size;
  const std::size_t plane = input.extent(1) * input.extent(2);

  MaxoutResult result{Tensor({out_channels, input.extent(1), input.extent(2)}),
                      std::vector<std::uint32_t>(out_channels * plane)};
  for (std::size_t g = 0; g < out_channels; ++g) {
    const double* first = input.data() + g * group_size * plane;
    double* out = result.output.data() + g * plane;
    std::uint32_t* arg = result.argmax.data() + g * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      out[p] = first[p];
      arg[p] = static_cast<std::uint32_t>(g * group_size);
    }
    for (std::size_t k = 1; k < group_size; ++k) {
      const double* chan = first + k * plane;
      const std::uint32_t index = static_cast<std::uint32_t>(g * group_size + k);
      for (std::size_t p = 0; p < plane; ++p) {
        if (chan[p] > out[p]) {  // strict: ties keep the lowest channel
          out[p] = chan[p];
          arg[p] = index;
        }
      }
    }
  }
  return result;
}

Tensor maxout_backward(const Tensor& grad_out, const std::vector<std::uint32_t>& argmax,
                       std::size_t in_channels) {
  const std::size_t plane = grad_out.extent(1) * grad_out.extent(2);
  Tensor grad_in({in_channels, grad_out.extent(1), grad_out.extent(2)});
  const double* g = grad_out.data();
  for (std::size_t o = 0; o < grad_out.extent(0); ++o) {
    for (std::size_t p = 0; p < plane; ++p) {
      const std::size_t idx = o * plane + p;
      grad_in.data()[argmax[idx] * plane + p] += g[idx];
    }
  }
  return grad_in;
}

// ---- softmax / log-sum-exp ------------------------------------------------

void softmax_inplace(std::span<double> values) {
  if (values.empty()) return;
  double max_value = values[0];
  for (double v : values) max_value = std::max(max_value, v);
  double sum = 0;
  for (double& v : values) {
    v = std::exp(v - max_value);
    sum += v;
  }
  for (double& v : values) v /= sum;
}

Tensor softmax(const Tensor& logits) {
  Tensor out = logits;
  softmax_inplace(out.flat());
  return out;
}

double log_sum_exp(std::span<const double> values) {
  double max_value = kLogZero;
  for (double v : values) max_value = std::max(max_value, v);
  if (max_value == kLogZero) return kLogZero;  // empty or all log-zero
  double sum = 0;
  for (double v : values) sum += std::exp(v - max_value);
  return max_value + std::log(sum);
}

double log_sum_exp(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// ---- SGD with momentum ------------------------------------------------------

void sgd_momentum_step(Tensor& params, const Tensor& grads, Tensor& velocity,
                       double learning_rate, double momentum) {
  if (!params.same_shape(grads) || !params.same_shape(velocity)) {
    throw ValidationError("sgd_momentum_step: parameter " + params.shape_string() +
                          ", gradient " + grads.shape_string() + " and velocity " +
                          velocity.shape_string() + " shapes must agree");
  }
  double* w = params.data();
  const double* g = grads.data();
  double* v = velocity.data();
  for (std::size_t i = 0; i < params.size(); ++i) {
    v[i] = momentum * v[i] - learning_rate * g[i];
    w[i] += v[i];
  }
}

void sgd_momentum_step(const std::vector<Tensor*>& params, const std::vector<Tensor*>& grads,
                       OptimizerState& state) {
  if (params.size() != grads.size() || params.size() != state.velocity.size()) {
    throw ValidationError("sgd_momentum_step: parameter/gradient/velocity counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    sgd_momentum_step(*params[i], *grads[i], state.velocity[i], state.learning_rate,
                      state.momentum);
  }
}

// ---- initialization ----------------------------------------------------------

Tensor random_init(const std::vector<std::size_t>& shape, std::size_t fan_in,
                   std::size_t fan_out, Rng& rng) {
  Tensor out(shape);
  const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : out.flat()) v = rng.uniform(-s, s);
  return out;
}

Tensor random_init(const std::vector<std::size_t>& shape, Rng& rng) {
  std::size_t fan_in = 0, fan_out = 0;
  switch (shape.size()) {
    case 4:
      fan_in = shape[1] * shape[2] * shape[3];
      fan_out = shape[0] * shape[2] * shape[3];
      break;
    case 2:
      fan_in = shape[1];
      fan_out = shape[0];
      break;
    case 1:
      fan_in = fan_out = shape[0];
      break;
    default:
      throw ValidationError("random_init: no fan rule for rank " +
                            std::to_string(shape.size()));
  }
  return random_init(shape, fan_in, fan_out, rng);
}

}  // namespace dtrn
