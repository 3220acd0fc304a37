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

#include "vidsgg/features.hpp"

#include <algorithm>

#include "vidsgg/errors.hpp"

namespace vidsgg {

Matrix spatial_feature(std::span<const Box> boxes) {
  if (boxes.empty()) throw InvalidInput("spatial_feature: empty tracklet");
  const Eigen::Index l = static_cast<Eigen::Index>(boxes.size());
  Matrix out = Matrix::Zero(l, kSpatialDim);
  for (Eigen::Index j = 0; j < l; ++j) {
    for (int c = 0; c < 4; ++c) {
      out(j, c) = boxes[j][c];
      if (j + 1 < l) out(j, 4 + c) = boxes[j + 1][c] - boxes[j][c];
    }
  }
  return out;
}

Matrix chunk_pool_matrix(int length, int pool_len) {
  if (length < 1 || pool_len < 1) {
    throw InvalidInput("chunk_pool_matrix: length and pool_len must be >= 1");
  }
  Matrix p = Matrix::Zero(pool_len, length);
  for (int c = 0; c < pool_len; ++c) {
    if (length >= pool_len) {
      const int lo = static_cast<int>(static_cast<long>(c) * length / pool_len);
      const int hi =
          static_cast<int>(static_cast<long>(c + 1) * length / pool_len);
      for (int t = lo; t < hi; ++t) p(c, t) = 1.0 / (hi - lo);
    } else {
      const int t = std::min(
          length - 1, static_cast<int>((c + 0.5) * length / pool_len));
      p(c, t) = 1.0;
    }
  }
  return p;
}

TrackletEncoder::TrackletEncoder(ad::ParamStore& store, const std::string& name,
                                 const FeatureConfig& cfg, Rng& rng)
    : cfg_(cfg),
      mlp_a_(store, name + ".mlp_a", cfg.appearance_dim, cfg.hidden,
             cfg.model_dim, rng),
      mlp_s_(store, name + ".mlp_s", kSpatialDim, cfg.hidden, cfg.model_dim,
             rng),
      conv_(store, name + ".conv", 2 * cfg.model_dim, cfg.model_dim,
            cfg.conv_kernel, 1, rng, /*replicate=*/true),
      pool_proj_(store, name + ".pool_proj", cfg.pool_len * cfg.model_dim,
                 cfg.hidden, cfg.model_dim, rng) {}

TrackletFeatureVars TrackletEncoder::operator()(ad::Tape& tape,
                                                const Matrix& appearance,
                                                const Matrix& spatial) const {
  if (appearance.rows() < 1 || appearance.rows() != spatial.rows() ||
      appearance.cols() != cfg_.appearance_dim ||
      spatial.cols() != kSpatialDim) {
    throw InvalidInput("tracklet_feature: shape mismatch");
  }
  if (!appearance.allFinite() || !spatial.allFinite()) {
    throw InvalidInput("tracklet_feature: non-finite input");
  }
  const int l = static_cast<int>(appearance.rows());
  const ad::Var a = mlp_a_(tape, tape.constant(appearance));
  const ad::Var s = mlp_s_(tape, tape.constant(spatial));
  TrackletFeatureVars out;
  out.sequence = conv_(tape, ad::concat_cols({a, s}));
  const ad::Var chunks =
      ad::left_mul_const(chunk_pool_matrix(l, cfg_.pool_len), out.sequence);
  out.pooled = pool_proj_(
      tape, ad::reshape(chunks, 1, cfg_.pool_len * cfg_.model_dim));
  return out;
}

}  // namespace vidsgg
