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

// End-to-end inference: classification, then grounding (or overlap-only
// slots), producing scored relation triplets per video.

#ifndef VIDSGG_PIPELINE_HPP_
#define VIDSGG_PIPELINE_HPP_

#include <span>
#include <string>
#include <vector>

#include "vidsgg/classifier.hpp"
#include "vidsgg/data_io.hpp"
#include "vidsgg/evaluation.hpp"
#include "vidsgg/grounding.hpp"

namespace vidsgg {

enum class InferMode { kGrounded, kOverlapOnly };

// Drops the background column.
std::vector<ClassifiedQuery> to_queries(const Classification& c);
// Perfect classification: one query per ground-truth predicate node with a
// one-hot category.
std::vector<ClassifiedQuery> oracle_queries(const SceneRecord& scene,
                                            int predicate_categories);

std::vector<RelationTriplet> ground_queries(const GroundingModel& model,
                                            const SceneRecord& scene,
                                            std::span<const ClassifiedQuery> queries,
                                            const InferenceOptions& opts);

// `grounding` may be null in kOverlapOnly mode.
std::vector<RelationTriplet> infer_scene(const Classifier& classifier,
                                         const GroundingModel* grounding,
                                         const SceneRecord& scene, InferMode mode,
                                         const InferenceOptions& opts);

Predictions infer_scenes(const Classifier& classifier,
                         const GroundingModel* grounding,
                         std::span<const SceneRecord> scenes, InferMode mode,
                         const InferenceOptions& opts, int threads = 1);

// Pairs ground truth with predictions by video id (missing -> none).
std::vector<VideoEval> make_eval_set(std::span<const SceneRecord> scenes,
                                     const Predictions& preds);

}  // namespace vidsgg

#endif  // VIDSGG_PIPELINE_HPP_
