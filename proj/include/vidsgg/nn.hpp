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

// Layer building blocks shared by the classification and grounding stages.
// Layers hold non-owning pointers into a ParamStore; the store must outlive
// them and must not be copied.

#ifndef VIDSGG_NN_HPP_
#define VIDSGG_NN_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vidsgg/autodiff.hpp"

namespace vidsgg {

using Rng = std::mt19937_64;

// Xavier-uniform initialised fan_in x fan_out matrix.
Matrix xavier(Rng& rng, int fan_in, int fan_out);
Matrix gaussian(Rng& rng, int rows, int cols, double stddev);

namespace nn {

// y = x W + b, with W stored as in x out.
class Linear {
 public:
  Linear() = default;
  Linear(ad::ParamStore& store, const std::string& name, int in, int out,
         Rng& rng, bool bias = true);

  ad::Var operator()(ad::Tape& tape, const ad::Var& x) const;

  int in() const { return in_; }
  int out() const { return out_; }
  ad::Parameter* weight() const { return weight_; }
  ad::Parameter* bias() const { return bias_; }

 private:
  ad::Parameter* weight_ = nullptr;
  ad::Parameter* bias_ = nullptr;
  int in_ = 0;
  int out_ = 0;
};

// Two fully-connected layers with a ReLU in between.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ad::ParamStore& store, const std::string& name, int in, int hidden,
      int out, Rng& rng);

  ad::Var operator()(ad::Tape& tape, const ad::Var& x) const;

  int in() const { return first_.in(); }
  int out() const { return second_.out(); }

 private:
  Linear first_;
  Linear second_;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ad::ParamStore& store, const std::string& name, int dim);

  ad::Var operator()(ad::Tape& tape, const ad::Var& x) const;

 private:
  ad::Parameter* gain_ = nullptr;
  ad::Parameter* bias_ = nullptr;
};

// Scaled dot-product attention with `heads` heads over query rows and
// key/value rows. No masking, no positional terms.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ad::ParamStore& store, const std::string& name,
                     int query_dim, int kv_dim, int model_dim, int heads,
                     Rng& rng);

  ad::Var operator()(ad::Tape& tape, const ad::Var& query,
                     const ad::Var& key_value) const;
  ad::Var self(ad::Tape& tape, const ad::Var& x) const {
    return (*this)(tape, x, x);
  }

 private:
  Linear q_, k_, v_, o_;
  int heads_ = 1;
  int model_dim_ = 0;
};

// 1-D convolution along the row axis with "same" padding and stride 1.
// Padding is zero, or edge replication when `replicate` is set.
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(ad::ParamStore& store, const std::string& name, int in, int out,
         int kernel, int dilation, Rng& rng, bool replicate = false);

  ad::Var operator()(ad::Tape& tape, const ad::Var& x) const;

  int kernel() const { return kernel_; }

 private:
  Linear proj_;
  int kernel_ = 3;
  int dilation_ = 1;
  bool replicate_ = false;
};

// Post-norm transformer encoder layer:
//   x <- LNorm(x + MHSA(x)); x <- LNorm(x + FFN(x))
class EncoderLayer {
 public:
  EncoderLayer() = default;
  EncoderLayer(ad::ParamStore& store, const std::string& name, int dim,
               int heads, int ffn_hidden, Rng& rng);

  ad::Var operator()(ad::Tape& tape, const ad::Var& x) const;

 private:
  MultiHeadAttention attn_;
  LayerNorm norm1_;
  Mlp ffn_;
  LayerNorm norm2_;
};

// Sinusoidal position table, rows = positions.
Matrix sinusoidal_positions(int length, int dim);

}  // namespace nn
}  // namespace vidsgg

#endif  // VIDSGG_NN_HPP_
