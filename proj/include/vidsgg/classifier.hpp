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

// Classification stage: entity encoder, query decoder with role-aware
// cross-attention (two role channels, normalised over both the entity and
// the role axis), edge selection and predicate classification with a
// log-frequency triplet prior.

#ifndef VIDSGG_CLASSIFIER_HPP_
#define VIDSGG_CLASSIFIER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vidsgg/autodiff.hpp"
#include "vidsgg/features.hpp"
#include "vidsgg/graph.hpp"
#include "vidsgg/nn.hpp"

namespace vidsgg {

inline constexpr double kPriorEpsilon = 1e-3;

struct ClassifierConfig {
  int entity_categories = 10;
  int predicate_categories = 8;
  int queries = 192;      // m
  int model_dim = 512;    // d_e
  int query_dim = 512;    // d_q
  int heads = 8;
  int encoder_layers = 3;
  int decoder_layers = 3;
  int mlp_hidden = 512;
  int word_dim = 300;     // d_w
  FeatureConfig features;
  std::uint64_t seed = 0;

  // Small dimensions for single-core runs.
  static ClassifierConfig desk();
  // Throws InvalidInput when inconsistent.
  void validate() const;
};

// Numeric form of the two-axis normalisation of role logits a1, a2 (m x n):
//   entity factor E_r = softmax over entities of a_r
//   role factor   R_r = softmax over the two roles = sigmoid(a_r - a_other)
//   attention     Att_r = E_r .* R_r
struct AttentionTensor {
  Matrix entity_factor[2];
  Matrix role_factor[2];
  Matrix values[2];
};
AttentionTensor double_softmax(const Matrix& a1, const Matrix& a2);
// Differentiable version returning (Att_1, Att_2).
std::pair<ad::Var, ad::Var> double_softmax(const ad::Var& a1, const ad::Var& a2);

// Per query (j_s, j_o): argmax over entities of each channel, lowest index
// on ties.
std::vector<std::pair<int, int>> select_edges(const Matrix& subject_attn,
                                              const Matrix& object_attn);

// softmax(mlp_logits + prior_row), both of equal length.
RowVector predicate_probabilities(const RowVector& mlp_logits,
                                  const RowVector& prior_row);

// Log-frequency prior indexed [s * |C_e| + o][p]:
//   b = ln((count(s,o,p) + eps) / (count(s,o) + eps * |C_p|)),
// counting predicate nodes of the training graphs.
Matrix build_prior(std::span<const TemporalBipartiteGraph> graphs,
                   int entity_categories, int predicate_categories,
                   double eps = kPriorEpsilon);

// Deterministic unit-norm rows.
Matrix random_unit_embeddings(int count, int dim, std::uint64_t seed);

class Raca {
 public:
  struct Output {
    ad::Var fused;         // m x d_q
    ad::Var subject_attn;  // m x n
    ad::Var object_attn;   // m x n
  };

  Raca() = default;
  Raca(ad::ParamStore& store, const std::string& name, int query_dim,
       int model_dim, int hidden, Rng& rng);

  Output operator()(ad::Tape& tape, const ad::Var& queries,
                    const ad::Var& entities) const;

 private:
  nn::Linear wq_[2];
  nn::Linear wk_[2];
  nn::Mlp f_s_;
  nn::Mlp f_o_;
  int model_dim_ = 0;
};

// Q' = LN(Q + MHSA(Q)); Q'' = LN(Q' + RaCA(Q', H)); out = LN(Q'' + FFN(Q'')).
class DecoderLayer {
 public:
  DecoderLayer() = default;
  DecoderLayer(ad::ParamStore& store, const std::string& name,
               const ClassifierConfig& cfg, Rng& rng);

  Raca::Output operator()(ad::Tape& tape, const ad::Var& queries,
                          const ad::Var& entities) const;

 private:
  nn::MultiHeadAttention self_attn_;
  nn::LayerNorm norm1_;
  Raca raca_;
  nn::LayerNorm norm2_;
  nn::Mlp ffn_;
  nn::LayerNorm norm3_;
};

struct ClassifierForward {
  ad::Var pooled;        // H, n x d_e
  ad::Var encoded;       // n x d_e
  ad::Var queries;       // m x d_q, last decoder layer
  ad::Var subject_attn;  // m x n, last decoder layer
  ad::Var object_attn;   // m x n
  std::vector<std::pair<int, int>> edges;
  ad::Var probs;         // m x (|C_p| + 1), background last
};

// Plain-value result of one classification pass.
struct Classification {
  Matrix probs;
  Matrix subject_attn;
  Matrix object_attn;
  std::vector<std::pair<int, int>> edges;
};

class Classifier {
 public:
  explicit Classifier(const ClassifierConfig& cfg);
  Classifier(const Classifier&) = delete;
  Classifier& operator=(const Classifier&) = delete;

  const ClassifierConfig& config() const { return cfg_; }
  ad::ParamStore& params() { return store_; }
  const ad::ParamStore& params() const { return store_; }

  // Shape (|C_e|^2) x |C_p|.
  void set_prior(const Matrix& prior);
  // Shape |C_e| x d_w.
  void set_entity_embeddings(const Matrix& table);

  // `appearance[i]` is l_i x d_a for entities[i]. With `fixed_edges` the
  // classification head reads those edges instead of the argmax selection.
  ClassifierForward forward(
      ad::Tape& tape, std::span<const Tracklet> entities,
      std::span<const Matrix> appearance,
      const std::optional<std::vector<std::pair<int, int>>>& fixed_edges =
          std::nullopt) const;

  ad::Var encode(ad::Tape& tape, const ad::Var& pooled) const;
  Raca::Output decode(ad::Tape& tape, const ad::Var& encoded) const;

  Classification classify(std::span<const Tracklet> entities,
                          std::span<const Matrix> appearance) const;

 private:
  ClassifierConfig cfg_;
  mutable ad::ParamStore store_;
  TrackletEncoder tracklet_encoder_;
  std::vector<nn::EncoderLayer> encoder_;
  std::vector<DecoderLayer> decoder_;
  ad::Parameter* queries_ = nullptr;
  ad::Parameter* entity_embedding_ = nullptr;
  ad::Parameter* prior_ = nullptr;
  nn::Mlp head_;
};

}  // namespace vidsgg

#endif  // VIDSGG_CLASSIFIER_HPP_
