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

// Set-prediction supervision for the classification stage: entity
// assignment by vIoU, optimal one-to-one query matching, and the stage loss.

#ifndef VIDSGG_MATCHING_HPP_
#define VIDSGG_MATCHING_HPP_

#include <optional>
#include <span>
#include <vector>

#include "vidsgg/autodiff.hpp"
#include "vidsgg/graph.hpp"

namespace vidsgg {

inline constexpr double kDefaultLambdaAtt = 30.0;
inline constexpr double kEntityAssignViou = 0.5;
inline constexpr double kLogClamp = 1e-12;
// Category value marking a padded (background) ground-truth slot.
inline constexpr int kBackground = -1;

// entity_map[i] = ground-truth index claimed by detected tracklet i, or -1.
// Greedy by descending vIoU over category-matching pairs with vIoU >= 0.5;
// each ground truth is claimed at most once.
std::vector<int> assign_gt_entities(std::span<const Tracklet> detected,
                                    std::span<const Tracklet> gt,
                                    double threshold = kEntityAssignViou);

// Ground-truth predicate nodes in detected-entity coordinates, padded with
// background to exactly m entries.
struct GtAssignment {
  std::vector<int> entity_map;
  std::vector<int> categories;  // size m; kBackground for padding
  std::vector<Matrix> adjacency;  // size m; each 2 x n binary (A*)
  int dropped = 0;  // ground-truth nodes beyond m that were ignored
};

GtAssignment build_gt_assignment(const TemporalBipartiteGraph& gt,
                                 std::span<const Tracklet> detected, int m);

// Optimal linear assignment on a square matrix. Returns col[row]. Throws
// InvalidInput on non-square or non-finite input.
std::vector<int> hungarian(const Matrix& cost);
double assignment_cost(const Matrix& cost, const std::vector<int>& col_of_row);

// Cost of pairing one ground-truth node with one prediction:
//   1{c != bg} * (-log P(c) + lambda * BCE(a*, a_hat)),
// BCE averaged over the 2n entries. `gt_adjacency` and `pred_adjacency` are
// 2 x n; `probs` holds per-class probabilities.
double match_cost(int gt_category, const Matrix& gt_adjacency,
                  const RowVector& probs, const Matrix& pred_adjacency,
                  double lambda_att = kDefaultLambdaAtt);

struct MatchResult {
  std::vector<int> prediction_of_gt;  // sigma: gt index -> query index
  std::vector<double> pair_cost;      // cost of each (gt, sigma(gt)) pair
};

struct StageLoss {
  ad::Var loss;
  MatchResult match;
};

// Classification-stage loss for one video.
//   probs:        m x (C+1) predicate probabilities, background last
//   subject_attn: m x n  (channel 1 of the role-aware attention)
//   object_attn:  m x n  (channel 2)
// Matching is computed from current values and treated as constant; pass
// `fixed_match` to reuse a previous permutation (e.g. in finite-difference
// checks).
StageLoss stage_loss(const ad::Var& probs, const ad::Var& subject_attn,
                     const ad::Var& object_attn, const GtAssignment& targets,
                     double lambda_att = kDefaultLambdaAtt,
                     const std::optional<std::vector<int>>& fixed_match =
                         std::nullopt);

}  // namespace vidsgg

#endif  // VIDSGG_MATCHING_HPP_
