// SPDX-License-Identifier: Apache-2.0
#include "mmrl/nn/gru.hpp"

#include <cmath>

#include "mmrl/common/errors.hpp"

namespace mmrl::nn {
namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void add_row_bias(Tensor& t, const Tensor& bias) {
  const std::size_t cols = t.dim(1);
  for (std::size_t r = 0; r < t.dim(0); ++r) {
    for (std::size_t c = 0; c < cols; ++c) t(r, c) += bias[c];
  }
}

void accumulate_column_sums(Tensor& grad, const Tensor& d) {
  for (std::size_t r = 0; r < d.dim(0); ++r) {
    for (std::size_t c = 0; c < d.dim(1); ++c) grad[c] += d(r, c);
  }
}

}  // namespace

GruCell::GruCell(ParameterSet& params, const std::string& name, std::size_t input_size, std::size_t hidden_size,
                 Rng& rng)
    : input_(input_size), hidden_(hidden_size) {
  w_x_ = params.add(name + ".w_x", uniform_init({input_size, 3 * hidden_size}, input_size, rng));
  w_h_ = params.add(name + ".w_h", uniform_init({hidden_size, 3 * hidden_size}, hidden_size, rng));
  b_x_ = params.add(name + ".b_x", Tensor({3 * hidden_size}));
  b_h_ = params.add(name + ".b_h", Tensor({3 * hidden_size}));
}

Tensor GruCell::step(const ParameterSet& params, const Tensor& x, const Tensor& h_prev, GruStepCache* cache) const {
  if (x.rank() != 2 || x.dim(1) != input_) {
    throw ValidationError("gru_step: shape mismatch, expected [batch, " + std::to_string(input_) + "], got " +
                          shape_string(x.shape()));
  }
  require_shape(h_prev, {x.dim(0), hidden_}, "gru_step hidden state");
  const std::size_t batch = x.dim(0), h = hidden_;

  Tensor gx = matmul(x, params[w_x_].value);
  add_row_bias(gx, params[b_x_].value);
  Tensor gh = matmul(h_prev, params[w_h_].value);
  add_row_bias(gh, params[b_h_].value);

  Tensor r({batch, h}), z({batch, h}), n({batch, h}), hn({batch, h}), out({batch, h});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < h; ++j) {
      r(b, j) = sigmoid(gx(b, j) + gh(b, j));
      z(b, j) = sigmoid(gx(b, h + j) + gh(b, h + j));
      hn(b, j) = gh(b, 2 * h + j);
      n(b, j) = std::tanh(gx(b, 2 * h + j) + r(b, j) * hn(b, j));
      out(b, j) = (1.0 - z(b, j)) * n(b, j) + z(b, j) * h_prev(b, j);
    }
  }
  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->reset = std::move(r);
    cache->update = std::move(z);
    cache->candidate = std::move(n);
    cache->hidden_n = std::move(hn);
  }
  return out;
}

std::pair<Tensor, Tensor> GruCell::step_backward(ParameterSet& params, const GruStepCache& cache,
                                                 const Tensor& dh) const {
  const std::size_t batch = cache.x.dim(0), h = hidden_;
  require_shape(dh, {batch, h}, "gru_step backward");

  Tensor dgx({batch, 3 * h});
  Tensor dgh({batch, 3 * h});
  Tensor dh_prev({batch, h});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < h; ++j) {
      const double r = cache.reset(b, j), z = cache.update(b, j), n = cache.candidate(b, j);
      const double g = dh(b, j);
      const double dn = g * (1.0 - z);
      const double dz = g * (cache.h_prev(b, j) - n);
      dh_prev(b, j) = g * z;
      const double dan = dn * (1.0 - n * n);
      const double dr = dan * cache.hidden_n(b, j);
      const double dar = dr * r * (1.0 - r);
      const double daz = dz * z * (1.0 - z);
      dgx(b, j) = dar;
      dgx(b, h + j) = daz;
      dgx(b, 2 * h + j) = dan;
      dgh(b, j) = dar;
      dgh(b, h + j) = daz;
      dgh(b, 2 * h + j) = dan * r;
    }
  }
  add_inplace(params[w_x_].grad, matmul_tn(cache.x, dgx));
  add_inplace(params[w_h_].grad, matmul_tn(cache.h_prev, dgh));
  accumulate_column_sums(params[b_x_].grad, dgx);
  accumulate_column_sums(params[b_h_].grad, dgh);
  Tensor dx = matmul_nt(dgx, params[w_x_].value);
  add_inplace(dh_prev, matmul_nt(dgh, params[w_h_].value));
  return {std::move(dx), std::move(dh_prev)};
}

}  // namespace mmrl::nn
