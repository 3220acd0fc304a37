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

// Optimiser, learning-rate schedules and the two (separate) training loops.

#ifndef VIDSGG_TRAIN_HPP_
#define VIDSGG_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vidsgg/autodiff.hpp"
#include "vidsgg/classifier.hpp"
#include "vidsgg/data_io.hpp"
#include "vidsgg/grounding.hpp"
#include "vidsgg/matching.hpp"

namespace vidsgg {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip = 0.0;  // global L2 norm; 0 disables
};

// Bias-corrected first/second moment updates over trainable parameters.
class Adam {
 public:
  Adam(ad::ParamStore& store, AdamConfig cfg = {});
  // Applies one update from Parameter::grad, then zeroes the gradients.
  void step(double lr);
  int steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<ad::Parameter*> params_;
  std::vector<Matrix> m_, v_;
  int t_ = 0;
};

// Step decay: lr = base * factor^(number of milestones <= epoch), epochs
// counted from 0.
struct LrSchedule {
  double base = 5e-5;
  std::vector<int> milestones;
  double factor = 0.2;
  double at(int epoch) const;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;  // mean per-video loss over the epoch
  double lr = 0.0;
  int steps = 0;
};

struct TrainOptions {
  int epochs = 1;
  int batch_size = 4;
  LrSchedule lr;
  AdamConfig adam;
  std::uint64_t seed = 0;  // shuffling
  int threads = 1;
  double lambda_att = kDefaultLambdaAtt;
  std::function<void(const EpochLog&)> on_epoch;
};

// Per-video classification loss (entities = the scene's tracklets).
ad::Var classifier_video_loss(ad::Tape& tape, const Classifier& model,
                              const SceneRecord& scene, double lambda_att);
// Mean grounding loss over the scene's relations, queried with ground-truth
// categories and the subject/object overlap. Null Var if no query.
ad::Var grounding_video_loss(ad::Tape& tape, const GroundingModel& model,
                             const SceneRecord& scene);

std::vector<EpochLog> train_classifier(Classifier& model,
                                       std::span<const SceneRecord> scenes,
                                       const TrainOptions& opts);
std::vector<EpochLog> train_grounding(GroundingModel& model,
                                      std::span<const SceneRecord> scenes,
                                      const TrainOptions& opts);

std::string loss_log_csv(std::span<const EpochLog> logs);

}  // namespace vidsgg

#endif  // VIDSGG_TRAIN_HPP_
