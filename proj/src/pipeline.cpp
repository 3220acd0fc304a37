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

#include "vidsgg/pipeline.hpp"

#include "vidsgg/errors.hpp"
#include "vidsgg/parallel.hpp"

namespace vidsgg {

std::vector<ClassifiedQuery> to_queries(const Classification& c) {
  std::vector<ClassifiedQuery> out;
  const Eigen::Index fg = c.probs.cols() - 1;
  for (std::size_t j = 0; j < c.edges.size(); ++j) {
    out.push_back({c.edges[j].first, c.edges[j].second,
                   c.probs.row(static_cast<Eigen::Index>(j)).head(fg)});
  }
  return out;
}

std::vector<ClassifiedQuery> oracle_queries(const SceneRecord& scene,
                                            int predicate_categories) {
  std::vector<ClassifiedQuery> out;
  for (const auto& p : to_graph(scene).predicates) {
    RowVector probs = RowVector::Zero(predicate_categories);
    probs(p.category) = 1.0;
    out.push_back({p.subject, p.object, probs});
  }
  return out;
}

std::vector<RelationTriplet> ground_queries(const GroundingModel& model,
                                            const SceneRecord& scene,
                                            std::span<const ClassifiedQuery> queries,
                                            const InferenceOptions& opts) {
  const auto candidates =
      collect_candidates(scene.tracklets, scene.frame_count, queries, opts.k_keep);
  std::vector<GroundingQuery> gq;
  gq.reserve(candidates.size());
  for (const auto& c : candidates) gq.push_back(make_query(c, scene.tracklets));
  const auto heads = model.predict(scene.frame_features, gq);
  std::vector<std::vector<GroundedSlot>> grounded;
  grounded.reserve(heads.size());
  for (const auto& h : heads) grounded.push_back(decode_slots(h));
  return infer_pipeline(scene.tracklets, scene.frame_count, candidates, grounded,
                        opts);
}

std::vector<RelationTriplet> infer_scene(const Classifier& classifier,
                                         const GroundingModel* grounding,
                                         const SceneRecord& scene, InferMode mode,
                                         const InferenceOptions& opts) {
  if (scene.tracklets.empty()) return {};
  const auto queries =
      to_queries(classifier.classify(scene.tracklets, scene.appearance));
  if (mode == InferMode::kOverlapOnly) {
    return vidvrd_mode(scene.tracklets, scene.frame_count, queries, opts.k_keep);
  }
  if (grounding == nullptr) {
    throw InvalidInput("infer_scene: grounded mode needs a grounding model");
  }
  return ground_queries(*grounding, scene, queries, opts);
}

Predictions infer_scenes(const Classifier& classifier,
                         const GroundingModel* grounding,
                         std::span<const SceneRecord> scenes, InferMode mode,
                         const InferenceOptions& opts, int threads) {
  std::vector<std::vector<RelationTriplet>> out(scenes.size());
  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    out[i] = infer_scene(classifier, grounding, scenes[i], mode, opts);
  });
  Predictions preds;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    preds[scenes[i].video_id] = std::move(out[i]);
  }
  return preds;
}

std::vector<VideoEval> make_eval_set(std::span<const SceneRecord> scenes,
                                     const Predictions& preds) {
  std::vector<VideoEval> out;
  out.reserve(scenes.size());
  for (const auto& s : scenes) {
    VideoEval v;
    v.video_id = s.video_id;
    v.gts = gt_triplets(s);
    auto it = preds.find(s.video_id);
    if (it != preds.end()) v.preds = it->second;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace vidsgg
