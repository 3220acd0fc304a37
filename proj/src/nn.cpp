/* Copyright 2026 The vidsgg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "vidsgg/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace vidsgg {

Matrix xavier(Rng& rng, int fan_in, int fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(fan_in, fan_out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Matrix gaussian(Rng& rng, int rows, int cols, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

namespace nn {

using ad::Tape;
using ad::Var;

Linear::Linear(ad::ParamStore& store, const std::string& name, int in, int out,
               Rng& rng, bool bias)
    : in_(in), out_(out) {
  if (in <= 0 || out <= 0) {
    throw std::invalid_argument(name + ": layer dimensions must be positive");
  }
  weight_ = &store.add(name + ".weight", xavier(rng, in, out));
  if (bias) bias_ = &store.add(name + ".bias", Matrix::Zero(1, out));
}

Var Linear::operator()(Tape& tape, const Var& x) const {
  Var y = ad::matmul(x, tape.param(*weight_));
  if (bias_ != nullptr) y = ad::add_row(y, tape.param(*bias_));
  return y;
}

Mlp::Mlp(ad::ParamStore& store, const std::string& name, int in, int hidden,
         int out, Rng& rng)
    : first_(store, name + ".fc1", in, hidden, rng),
      second_(store, name + ".fc2", hidden, out, rng) {}

Var Mlp::operator()(Tape& tape, const Var& x) const {
  return second_(tape, ad::relu(first_(tape, x)));
}

LayerNorm::LayerNorm(ad::ParamStore& store, const std::string& name, int dim)
    : gain_(&store.add(name + ".gain", Matrix::Ones(1, dim))),
      bias_(&store.add(name + ".bias", Matrix::Zero(1, dim))) {}

Var LayerNorm::operator()(Tape& tape, const Var& x) const {
  return ad::layer_norm_rows(x, tape.param(*gain_), tape.param(*bias_));
}

MultiHeadAttention::MultiHeadAttention(ad::ParamStore& store,
                                       const std::string& name, int query_dim,
                                       int kv_dim, int model_dim, int heads,
                                       Rng& rng)
    : q_(store, name + ".q", query_dim, model_dim, rng),
      k_(store, name + ".k", kv_dim, model_dim, rng),
      v_(store, name + ".v", kv_dim, model_dim, rng),
      o_(store, name + ".o", model_dim, query_dim, rng),
      heads_(heads),
      model_dim_(model_dim) {
  if (heads <= 0 || model_dim % heads != 0) {
    throw std::invalid_argument(name + ": model_dim must be divisible by heads");
  }
}

Var MultiHeadAttention::operator()(Tape& tape, const Var& query,
                                   const Var& key_value) const {
  const Var q = q_(tape, query);
  const Var k = k_(tape, key_value);
  const Var v = v_(tape, key_value);
  const int head_dim = model_dim_ / heads_;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  std::vector<Var> outs;
  outs.reserve(heads_);
  for (int h = 0; h < heads_; ++h) {
    const Var qh = ad::slice_cols(q, h * head_dim, head_dim);
    const Var kh = ad::slice_cols(k, h * head_dim, head_dim);
    const Var vh = ad::slice_cols(v, h * head_dim, head_dim);
    const Var weights = ad::softmax_rows(ad::scale(ad::matmul_nt(qh, kh), inv_sqrt));
    outs.push_back(ad::matmul(weights, vh));
  }
  const Var merged = heads_ == 1 ? outs.front() : ad::concat_cols(outs);
  return o_(tape, merged);
}

Conv1d::Conv1d(ad::ParamStore& store, const std::string& name, int in, int out,
               int kernel, int dilation, Rng& rng, bool replicate)
    : proj_(store, name, in * kernel, out, rng),
      kernel_(kernel),
      dilation_(dilation),
      replicate_(replicate) {}

Var Conv1d::operator()(Tape& tape, const Var& x) const {
  if (kernel_ == 1) return proj_(tape, x);
  return proj_(tape, ad::im2col(x, kernel_, dilation_, replicate_));
}

EncoderLayer::EncoderLayer(ad::ParamStore& store, const std::string& name,
                           int dim, int heads, int ffn_hidden, Rng& rng)
    : attn_(store, name + ".attn", dim, dim, dim, heads, rng),
      norm1_(store, name + ".norm1", dim),
      ffn_(store, name + ".ffn", dim, ffn_hidden, dim, rng),
      norm2_(store, name + ".norm2", dim) {}

Var EncoderLayer::operator()(Tape& tape, const Var& x) const {
  const Var a = norm1_(tape, ad::add(x, attn_.self(tape, x)));
  return norm2_(tape, ad::add(a, ffn_(tape, a)));
}

Matrix sinusoidal_positions(int length, int dim) {
  Matrix pe(length, dim);
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / dim);
      pe(pos, i) = (i % 2 == 0) ? std::sin(pos * rate) : std::cos(pos * rate);
    }
  }
  return pe;
}

}  // namespace nn
}  // namespace vidsgg
