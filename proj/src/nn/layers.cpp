// SPDX-License-Identifier: Apache-2.0
#include "mmrl/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmrl/common/errors.hpp"

namespace mmrl::nn {

Linear::Linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng)
    : in_(in), out_(out) {
  weight_ = params.add(name + ".weight", uniform_init({in, out}, in, rng));
  bias_ = params.add(name + ".bias", Tensor({out}));
}

Tensor Linear::forward(const ParameterSet& params, const Tensor& x) const {
  if (x.rank() != 2 || x.dim(1) != in_) {
    throw ValidationError("linear: shape mismatch, expected [batch, " + std::to_string(in_) + "], got " +
                          shape_string(x.shape()));
  }
  Tensor y = matmul(x, params[weight_].value);
  const auto b = params[bias_].value.data();
  for (std::size_t r = 0; r < y.dim(0); ++r) {
    for (std::size_t c = 0; c < out_; ++c) y(r, c) += b[c];
  }
  return y;
}

Tensor Linear::backward(ParameterSet& params, const Tensor& x, const Tensor& dy) const {
  require_shape(dy, {x.dim(0), out_}, "linear backward");
  add_inplace(params[weight_].grad, matmul_tn(x, dy));
  auto db = params[bias_].grad.data();
  for (std::size_t r = 0; r < dy.dim(0); ++r) {
    for (std::size_t c = 0; c < out_; ++c) db[c] += dy(r, c);
  }
  return matmul_nt(dy, params[weight_].value);
}

Conv2d::Conv2d(ParameterSet& params, const std::string& name, std::size_t in_channels, std::size_t out_channels,
               std::size_t kernel, std::size_t padding, Rng& rng)
    : in_channels_(in_channels), out_channels_(out_channels), kernel_(kernel), padding_(padding) {
  weight_ = params.add(name + ".weight",
                       uniform_init({out_channels, in_channels, kernel, kernel}, in_channels * kernel * kernel, rng));
  bias_ = params.add(name + ".bias", Tensor({out_channels}));
}

void Conv2d::check_input(const Shape& input) const {
  if (input.size() != 4 || input[1] != in_channels_) {
    throw ValidationError("conv2d: shape mismatch, expected [batch, " + std::to_string(in_channels_) +
                          ", H, W], got " + shape_string(input));
  }
  if (input[2] + 2 * padding_ < kernel_ || input[3] + 2 * padding_ < kernel_) {
    throw ValidationError("conv2d: kernel does not fit input " + shape_string(input));
  }
}

Shape Conv2d::output_shape(const Shape& input) const {
  check_input(input);
  return {input[0], out_channels_, input[2] + 2 * padding_ - kernel_ + 1, input[3] + 2 * padding_ - kernel_ + 1};
}

Tensor Conv2d::forward(const ParameterSet& params, const Tensor& x) const {
  const Shape out_shape = output_shape(x.shape());
  const std::size_t batch = out_shape[0], oh = out_shape[2], ow = out_shape[3];
  const std::size_t h = x.dim(2), w = x.dim(3), k = kernel_;
  const auto& weight = params[weight_].value;
  const auto bias = params[bias_].value.data();
  Tensor y(out_shape);
  const auto pad = static_cast<std::ptrdiff_t>(padding_);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_channels_; ++o) {
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = bias[o];
          for (std::size_t c = 0; c < in_channels_; ++c) {
            for (std::size_t u = 0; u < k; ++u) {
              const auto row = static_cast<std::ptrdiff_t>(i + u) - pad;
              if (row < 0 || row >= static_cast<std::ptrdiff_t>(h)) continue;
              for (std::size_t v = 0; v < k; ++v) {
                const auto col = static_cast<std::ptrdiff_t>(j + v) - pad;
                if (col < 0 || col >= static_cast<std::ptrdiff_t>(w)) continue;
                acc += weight[((o * in_channels_ + c) * k + u) * k + v] *
                       x[((b * in_channels_ + c) * h + static_cast<std::size_t>(row)) * w + static_cast<std::size_t>(col)];
              }
            }
          }
          y[((b * out_channels_ + o) * oh + i) * ow + j] = acc;
        }
      }
    }
  }
  return y;
}

Tensor Conv2d::backward(ParameterSet& params, const Tensor& x, const Tensor& dy) const {
  const Shape out_shape = output_shape(x.shape());
  require_shape(dy, out_shape, "conv2d backward");
  const std::size_t batch = out_shape[0], oh = out_shape[2], ow = out_shape[3];
  const std::size_t h = x.dim(2), w = x.dim(3), k = kernel_;
  const auto& weight = params[weight_].value;
  auto& dweight = params[weight_].grad;
  auto dbias = params[bias_].grad.data();
  Tensor dx(x.shape());
  const auto pad = static_cast<std::ptrdiff_t>(padding_);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out_channels_; ++o) {
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j) {
          const double g = dy[((b * out_channels_ + o) * oh + i) * ow + j];
          dbias[o] += g;
          for (std::size_t c = 0; c < in_channels_; ++c) {
            for (std::size_t u = 0; u < k; ++u) {
              const auto row = static_cast<std::ptrdiff_t>(i + u) - pad;
              if (row < 0 || row >= static_cast<std::ptrdiff_t>(h)) continue;
              for (std::size_t v = 0; v < k; ++v) {
                const auto col = static_cast<std::ptrdiff_t>(j + v) - pad;
                if (col < 0 || col >= static_cast<std::ptrdiff_t>(w)) continue;
                const std::size_t xi =
                    ((b * in_channels_ + c) * h + static_cast<std::size_t>(row)) * w + static_cast<std::size_t>(col);
                const std::size_t wi = ((o * in_channels_ + c) * k + u) * k + v;
                dweight[wi] += g * x[xi];
                dx[xi] += g * weight[wi];
              }
            }
          }
        }
      }
    }
  }
  return dx;
}

Tensor mean_pool2x2(const Tensor& x) {
  if (x.rank() != 4 || x.dim(2) < 2 || x.dim(3) < 2) {
    throw ValidationError("mean_pool2x2: expected [batch, C, H>=2, W>=2], got " + shape_string(x.shape()));
  }
  const std::size_t n = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3), oh = h / 2, ow = w / 2;
  Tensor y({x.dim(0), x.dim(1), oh, ow});
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const std::size_t base = (p * h + 2 * i) * w + 2 * j;
        y[(p * oh + i) * ow + j] = 0.25 * (x[base] + x[base + 1] + x[base + w] + x[base + w + 1]);
      }
    }
  }
  return y;
}

Tensor mean_pool2x2_backward(const Shape& input_shape, const Tensor& dy) {
  const std::size_t n = input_shape[0] * input_shape[1], h = input_shape[2], w = input_shape[3];
  const std::size_t oh = h / 2, ow = w / 2;
  require_shape(dy, {input_shape[0], input_shape[1], oh, ow}, "mean_pool2x2 backward");
  Tensor dx(input_shape);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        const double g = 0.25 * dy[(p * oh + i) * ow + j];
        const std::size_t base = (p * h + 2 * i) * w + 2 * j;
        dx[base] += g;
        dx[base + 1] += g;
        dx[base + w] += g;
        dx[base + w + 1] += g;
      }
    }
  }
  return dx;
}

Embedding::Embedding(ParameterSet& params, const std::string& name, std::size_t vocab, std::size_t dim, Rng& rng)
    : vocab_(vocab), dim_(dim) {
  Tensor init = uniform_init({vocab, dim}, 1, rng);
  for (std::size_t c = 0; c < dim; ++c) init(0, c) = 0.0;
  table_ = params.add(name + ".table", std::move(init));
}

Tensor Embedding::forward(const ParameterSet& params, std::span<const int> ids) const {
  const auto& table = params[table_].value;
  Tensor out({ids.size(), dim_});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const int id = ids[r];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_) {
      throw ValidationError("embedding: id " + std::to_string(id) + " out of range [0, " + std::to_string(vocab_) + ")");
    }
    if (id == kPadId) continue;
    for (std::size_t c = 0; c < dim_; ++c) out(r, c) = table(static_cast<std::size_t>(id), c);
  }
  return out;
}

void Embedding::backward(ParameterSet& params, std::span<const int> ids, const Tensor& dy) const {
  require_shape(dy, {ids.size(), dim_}, "embedding backward");
  auto& grad = params[table_].grad;
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] == kPadId) continue;
    for (std::size_t c = 0; c < dim_; ++c) grad(static_cast<std::size_t>(ids[r]), c) += dy(r, c);
  }
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& dy) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!(x[i] > 0.0)) dx[i] = 0.0;
  }
  return dx;
}

Tensor tanh(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = std::tanh(v);
  return y;
}

Tensor tanh_backward_from_output(const Tensor& y, const Tensor& dy) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= 1.0 - y[i] * y[i];
  return dx;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = 1.0 / (1.0 + std::exp(-v));
  return y;
}

Tensor sigmoid_backward_from_output(const Tensor& y, const Tensor& dy) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= y[i] * (1.0 - y[i]);
  return dx;
}

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 2 || logits.dim(1) == 0) throw ValidationError("softmax: expected [batch, k>=1]");
  Tensor out = logits;
  const std::size_t k = logits.dim(1);
  for (std::size_t r = 0; r < logits.dim(0); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, logits(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      out(r, c) = std::exp(logits(r, c) - mx);
      sum += out(r, c);
    }
    for (std::size_t c = 0; c < k; ++c) out(r, c) /= sum;
  }
  return out;
}

Tensor log_softmax(const Tensor& logits) {
  if (logits.rank() != 2 || logits.dim(1) == 0) throw ValidationError("log_softmax: expected [batch, k>=1]");
  Tensor out = logits;
  const std::size_t k = logits.dim(1);
  for (std::size_t r = 0; r < logits.dim(0); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, logits(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(logits(r, c) - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t c = 0; c < k; ++c) out(r, c) = logits(r, c) - lse;
  }
  return out;
}

}  // namespace mmrl::nn
