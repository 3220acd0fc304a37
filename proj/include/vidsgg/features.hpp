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

// Per-tracklet features: appearance and box-motion streams, a temporal
// convolution over frames, and fixed-length chunk pooling to one vector.

#ifndef VIDSGG_FEATURES_HPP_
#define VIDSGG_FEATURES_HPP_

#include <span>
#include <string>

#include "vidsgg/autodiff.hpp"
#include "vidsgg/graph.hpp"
#include "vidsgg/nn.hpp"

namespace vidsgg {

inline constexpr int kSpatialDim = 8;

struct FeatureConfig {
  int appearance_dim = 1024;  // d_a
  int model_dim = 512;        // d_e
  int hidden = 512;
  int pool_len = 4;
  int conv_kernel = 3;
};

// Row j = [b_j ; b_{j+1} - b_j]; the last row's offset is zero.
// Throws InvalidInput on an empty span.
Matrix spatial_feature(std::span<const Box> boxes);

// pool_len x length averaging matrix. Frames are split into pool_len equal
// chunks; when length < pool_len chunk c reads frame floor((c + 0.5) * l / L).
Matrix chunk_pool_matrix(int length, int pool_len);

struct TrackletFeatureVars {
  ad::Var sequence;  // l x d_e
  ad::Var pooled;    // 1 x d_e
};

class TrackletEncoder {
 public:
  TrackletEncoder() = default;
  TrackletEncoder(ad::ParamStore& store, const std::string& name,
                  const FeatureConfig& cfg, Rng& rng);

  // appearance: l x d_a, spatial: l x 8.
  TrackletFeatureVars operator()(ad::Tape& tape, const Matrix& appearance,
                                 const Matrix& spatial) const;

  const FeatureConfig& config() const { return cfg_; }

 private:
  FeatureConfig cfg_;
  nn::Mlp mlp_a_;
  nn::Mlp mlp_s_;
  nn::Conv1d conv_;
  nn::Mlp pool_proj_;
};

}  // namespace vidsgg

#endif  // VIDSGG_FEATURES_HPP_
