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

// Video relation scoring: relation detection (mAP, Recall@K), relation
// tagging (Precision@K) and per-sample fraction recall.

#ifndef VIDSGG_EVALUATION_HPP_
#define VIDSGG_EVALUATION_HPP_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "vidsgg/graph.hpp"

namespace vidsgg {

inline constexpr double kDefaultViouThreshold = 0.5;

// Spatio-temporal volume IoU. Frames covered by only one tracklet add that
// box's area to the union.
double viou(const Tracklet& a, const Tracklet& b);

// Stable sort by descending score; equal scores keep insertion order.
std::vector<RelationTriplet> rank_by_score(std::span<const RelationTriplet> preds);

struct MatchOutcome {
  std::vector<bool> hit;          // per prediction
  std::vector<int> gt_of_pred;    // claimed GT index or -1
  std::vector<int> pred_of_gt;    // claiming prediction rank or -1
};

// Greedy one-to-one matching in prediction order. A prediction claims the
// unclaimed GT with identical category triplet whose min(subject vIoU,
// object vIoU) is largest and at least `threshold`.
MatchOutcome greedy_match(std::span<const RelationTriplet> ranked_preds,
                          std::span<const RelationTriplet> gts,
                          double threshold = kDefaultViouThreshold);

struct VideoEval {
  std::string video_id;
  std::vector<RelationTriplet> gts;
  std::vector<RelationTriplet> preds;  // any order; ranked internally
};

struct RelDetMetrics {
  double mean_ap = 0.0;
  double recall_50 = 0.0;
  double recall_100 = 0.0;
};

struct RelTagMetrics {
  double precision_1 = 0.0;
  double precision_5 = 0.0;
  double precision_10 = 0.0;
};

inline constexpr std::array<int, 3> kFractionRecallKs = {50, 100, 150};

struct FractionRecallMetrics {
  std::array<int, 3> ks = kFractionRecallKs;
  std::array<double, 3> single{};  // fR_S@K
  std::array<double, 3> multi{};   // fR_M@K
  int single_samples = 0;
  int multi_samples = 0;
};

struct VideoMetrics {
  std::string video_id;
  int gt_count = 0;
  int pred_count = 0;
  int hit_count = 0;
  double average_precision = 0.0;
  double recall_50 = 0.0;
  double recall_100 = 0.0;
  double precision_1 = 0.0;
  double precision_5 = 0.0;
  double precision_10 = 0.0;
};

struct EvalReport {
  RelDetMetrics reldet;
  RelTagMetrics reltag;
  FractionRecallMetrics fraction;
  int gt_count = 0;
  int pred_count = 0;
  int hit_count = 0;
  int videos = 0;
  std::vector<VideoMetrics> per_video;

  std::string to_json(int indent = 2) const;
  // Plain-text table: RelDet | RelTag, then fraction recall.
  std::string to_table() const;
  std::string per_video_csv() const;
};

double average_precision(const std::vector<bool>& ranked_hits, int gt_count);

RelDetMetrics reldet(std::span<const VideoEval> videos,
                     double threshold = kDefaultViouThreshold);
RelTagMetrics reltag(std::span<const VideoEval> videos);
FractionRecallMetrics fraction_recall(std::span<const VideoEval> videos,
                                      double threshold = kDefaultViouThreshold);

// All metrics plus per-video rows. Videos are scored independently; with
// threads > 1 they are fanned out, results are identical.
EvalReport evaluate(std::span<const VideoEval> videos,
                    double threshold = kDefaultViouThreshold, int threads = 1);

}  // namespace vidsgg

#endif  // VIDSGG_EVALUATION_HPP_
