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

// Grounding stage: triplet-query features, frame/query fusion, the K-bin
// multi-instance head with its targets and losses, slot decoding, temporal
// NMS and the inference pipeline that turns classified queries into
// time-localised relation triplets.

#ifndef VIDSGG_GROUNDING_HPP_
#define VIDSGG_GROUNDING_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vidsgg/autodiff.hpp"
#include "vidsgg/graph.hpp"
#include "vidsgg/nn.hpp"

namespace vidsgg {

inline constexpr double kDefaultScoreFloor = 0.2;
inline constexpr double kDefaultNmsThreshold = 0.8;

struct GroundingConfig {
  int entity_categories = 10;
  int predicate_categories = 8;
  int word_dim = 300;   // d_w
  int frame_dim = 1024; // d_v
  int model_dim = 256;  // d
  int heads = 4;
  int mlp_hidden = 512;
  int bins = 10;        // K
  std::vector<int> dilations = {1, 2, 4, 8};
  bool frame_positions = true;
  std::uint64_t seed = 0;

  static GroundingConfig desk();
  void validate() const;
};

struct GroundingQuery {
  int subject_category = 0;
  int predicate_category = 0;
  int object_category = 0;
  TimeSlot overlap;
};

struct HeadOutput {
  Matrix cls;   // T x K
  Matrix reg;   // T x 2K, (start, end) per bin
  Matrix conf;  // T x K
};

struct HeadVars {
  ad::Var cls;
  ad::Var reg;
  ad::Var conf;
  HeadOutput values() const { return {cls.value(), reg.value(), conf.value()}; }
};

struct GroundedSlot {
  TimeSlot slot;
  double score = 0.0;
  int bin = -1;  // -1 for the appended overlap slot
};

// Bin k covers [k/K, (k+1)/K), the last bin is closed at 1. A slot goes to
// bin floor(center * K); collisions keep the longest slot.
std::vector<std::optional<TimeSlot>> assign_bins(std::span<const TimeSlot> slots,
                                                 int bins);
int bin_of(double center, int bins);

class GroundingModel {
 public:
  explicit GroundingModel(const GroundingConfig& cfg);
  GroundingModel(const GroundingModel&) = delete;
  GroundingModel& operator=(const GroundingModel&) = delete;

  const GroundingConfig& config() const { return cfg_; }
  ad::ParamStore& params() { return store_; }
  const ad::ParamStore& params() const { return store_; }

  void set_entity_embeddings(const Matrix& table);
  void set_predicate_embeddings(const Matrix& table);

  // 3 x d_w: MLP_w(S) + broadcast MLP_t([s, e]).
  ad::Var query_feature(ad::Tape& tape, const GroundingQuery& q) const;
  // Frame stream alone, T x d; shareable across queries of one video.
  ad::Var encode_frames(ad::Tape& tape, const Matrix& frames) const;
  // Query stream, cross-attention and projection: T x d.
  ad::Var fuse(ad::Tape& tape, const ad::Var& encoded_frames,
               const ad::Var& query_feature) const;
  ad::Var multimodal_fuse(ad::Tape& tape, const Matrix& frames,
                          const ad::Var& query_feature) const {
    return fuse(tape, encode_frames(tape, frames), query_feature);
  }
  HeadVars head(ad::Tape& tape, const ad::Var& fused) const;

  HeadVars forward(ad::Tape& tape, const ad::Var& encoded_frames,
                   const GroundingQuery& q) const;
  // Inference convenience: one head output per query.
  std::vector<HeadOutput> predict(const Matrix& frames,
                                  std::span<const GroundingQuery> queries) const;

 private:
  GroundingConfig cfg_;
  mutable ad::ParamStore store_;
  ad::Parameter* entity_embedding_ = nullptr;
  ad::Parameter* predicate_embedding_ = nullptr;
  nn::Mlp mlp_w_;
  nn::Mlp mlp_t_;
  nn::Linear frame_in_;
  nn::EncoderLayer frame_encoder_;
  nn::Linear query_in_;
  nn::EncoderLayer query_encoder_;
  nn::MultiHeadAttention cross_;
  nn::Linear fuse_out_;
  std::vector<nn::Conv1d> trunk_;
  nn::Linear cls_;
  nn::Linear reg_;
  nn::Linear conf_;
};

// Mean over bins of: per-frame BCE of cls (positive iff the frame centre lies
// in the bin's target), L1 of reg at positives, BCE of conf toward the tIoU
// of the frame's regressed slot at positives. Empty bins add cls terms only.
// The conf target is taken from the current reg values and carries no
// gradient.
ad::Var grounding_loss(const HeadVars& head,
                       const std::vector<std::optional<TimeSlot>>& targets);
// Same loss with the conf target given explicitly (T x K).
ad::Var grounding_loss(const HeadVars& head,
                       const std::vector<std::optional<TimeSlot>>& targets,
                       const Matrix& conf_target);
// tIoU of each positive frame's regressed slot with its bin target; 0
// elsewhere.
Matrix confidence_targets(const Matrix& reg,
                          const std::vector<std::optional<TimeSlot>>& targets);

// Frames counted as positive for `target` in a T-frame video; never empty.
std::vector<int> positive_frames(TimeSlot target, int frame_count);

// Clamp to [0,1] and order (start, end); nullopt if degenerate.
std::optional<TimeSlot> normalize_slot(double a, double b);

std::vector<GroundedSlot> decode_slots(const HeadOutput& head);

// Greedy by descending score (stable); drops a slot whose tIoU with a kept
// slot exceeds `threshold`.
std::vector<GroundedSlot> temporal_nms(std::vector<GroundedSlot> slots,
                                       double threshold = kDefaultNmsThreshold);

// ---- inference -------------------------------------------------------------

// One decoder query after classification.
struct ClassifiedQuery {
  int subject = 0;  // entity index
  int object = 0;
  RowVector probs;  // foreground predicate probabilities
};

// A triplet query for the grounding stage.
struct Candidate {
  int subject = 0;
  int object = 0;
  int predicate = 0;
  double probability = 0.0;
  TimeSlot overlap;
};

struct InferenceOptions {
  int k_keep = 10;
  double score_floor = kDefaultScoreFloor;
  double nms_threshold = kDefaultNmsThreshold;
};

// Top-k categories per query; self-relations, duplicates (first kept) and
// temporally disjoint pairs are dropped.
std::vector<Candidate> collect_candidates(std::span<const Tracklet> entities,
                                          int frame_count,
                                          std::span<const ClassifiedQuery> queries,
                                          int k_keep);

GroundingQuery make_query(const Candidate& c, std::span<const Tracklet> entities);

// Grounded slots of one candidate -> its triplets. Returns nothing when the
// best grounded score is below the floor (an empty list counts as 0).
std::vector<RelationTriplet> ground_candidate(const Candidate& c,
                                              std::span<const Tracklet> entities,
                                              int frame_count,
                                              std::span<const GroundedSlot> grounded,
                                              const InferenceOptions& opts);

std::vector<RelationTriplet> infer_pipeline(
    std::span<const Tracklet> entities, int frame_count,
    std::span<const Candidate> candidates,
    std::span<const std::vector<GroundedSlot>> grounded,
    const InferenceOptions& opts);

// Overlap slot only (K_j = 1), no grounding.
std::vector<RelationTriplet> vidvrd_mode(std::span<const Tracklet> entities,
                                         int frame_count,
                                         std::span<const ClassifiedQuery> queries,
                                         int k_keep);

}  // namespace vidsgg

#endif  // VIDSGG_GROUNDING_HPP_
