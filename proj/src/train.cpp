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

#include "vidsgg/train.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "vidsgg/errors.hpp"
#include "vidsgg/parallel.hpp"

namespace vidsgg {

Adam::Adam(ad::ParamStore& store, AdamConfig cfg)
    : cfg_(cfg), params_(store.trainable()) {
  for (const auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step(double lr) {
  ++t_;
  double scale = 1.0;
  if (cfg_.grad_clip > 0.0) {
    double sq = 0.0;
    for (const auto* p : params_) sq += p->grad.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > cfg_.grad_clip) scale = cfg_.grad_clip / norm;
  }
  const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    ad::Parameter& p = *params_[i];
    const Matrix g = p.grad * scale;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    p.value.array() -= lr * (m_[i].array() / c1) /
                       ((v_[i].array() / c2).sqrt() + cfg_.eps);
    p.grad.setZero();
  }
}

double LrSchedule::at(int epoch) const {
  double lr = base;
  for (int m : milestones) {
    if (epoch >= m) lr *= factor;
  }
  return lr;
}

ad::Var classifier_video_loss(ad::Tape& tape, const Classifier& model,
                              const SceneRecord& scene, double lambda_att) {
  const ClassifierForward f =
      model.forward(tape, scene.tracklets, scene.appearance);
  const GtAssignment gt = build_gt_assignment(to_graph(scene), scene.tracklets,
                                              model.config().queries);
  return stage_loss(f.probs, f.subject_attn, f.object_attn, gt, lambda_att).loss;
}

ad::Var grounding_video_loss(ad::Tape& tape, const GroundingModel& model,
                             const SceneRecord& scene) {
  const TemporalBipartiteGraph g = to_graph(scene);
  const ad::Var frames = model.encode_frames(tape, scene.frame_features);
  std::vector<ad::Var> losses;
  for (const auto& p : g.predicates) {
    const Tracklet& s = g.entities[p.subject];
    const Tracklet& o = g.entities[p.object];
    const auto overlap = intersect(s.frames(), o.frames());
    if (!overlap) continue;
    const GroundingQuery q{s.category, p.category, o.category,
                           TimeSlot::from_frames(*overlap, g.frame_count)};
    const HeadVars head = model.forward(tape, frames, q);
    losses.push_back(
        grounding_loss(head, assign_bins(p.time_slots, model.config().bins)));
  }
  if (losses.empty()) return {};
  ad::Var total = losses[0];
  for (std::size_t i = 1; i < losses.size(); ++i) total = ad::add(total, losses[i]);
  return ad::scale(total, 1.0 / static_cast<double>(losses.size()));
}

namespace {

using LossFn = std::function<ad::Var(ad::Tape&, const SceneRecord&)>;

std::vector<EpochLog> run_training(ad::ParamStore& store,
                                   std::span<const SceneRecord> scenes,
                                   const TrainOptions& opts, const LossFn& loss_fn,
                                   const char* stage) {
  if (opts.epochs < 0 || opts.batch_size < 1) {
    throw InvalidInput("training: epochs >= 0 and batch_size >= 1 required");
  }
  if (scenes.empty()) throw InvalidInput("training: no scenes");
  Adam adam(store, opts.adam);
  Rng rng(opts.seed);
  std::vector<std::size_t> order(scenes.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochLog> logs;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = opts.lr.at(epoch);
    double loss_sum = 0.0;
    int counted = 0, steps = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += opts.batch_size) {
      const std::size_t bn =
          std::min<std::size_t>(opts.batch_size, order.size() - b0);
      std::vector<double> losses(bn, 0.0);
      std::vector<bool> used(bn, false);
      std::vector<std::vector<std::pair<ad::Parameter*, Matrix>>> grads(bn);
      parallel_for(bn, opts.threads, [&](std::size_t i) {
        const SceneRecord& scene = scenes[order[b0 + i]];
        ad::Tape tape;
        tape.set_accumulate_into_params(false);
        const ad::Var loss = loss_fn(tape, scene);
        if (!loss.valid()) return;
        const double v = loss.scalar();
        if (!std::isfinite(v)) {
          throw NumericError(std::string(stage) + ": non-finite loss on " +
                             scene.video_id + " at epoch " +
                             std::to_string(epoch + 1));
        }
        tape.backward(loss);
        losses[i] = v;
        used[i] = true;
        grads[i] = tape.param_grads();
      });
      int n_used = 0;
      for (std::size_t i = 0; i < bn; ++i) n_used += used[i] ? 1 : 0;
      if (n_used == 0) continue;
      // Fixed summation order keeps results independent of thread count.
      for (std::size_t i = 0; i < bn; ++i) {
        if (!used[i]) continue;
        loss_sum += losses[i];
        ++counted;
        for (auto& [p, g] : grads[i]) p->grad += g / static_cast<double>(n_used);
      }
      adam.step(lr);
      ++steps;
    }
    EpochLog log{epoch + 1, counted ? loss_sum / counted : 0.0, lr, steps};
    logs.push_back(log);
    if (opts.on_epoch) opts.on_epoch(log);
  }
  return logs;
}

}  // namespace

std::vector<EpochLog> train_classifier(Classifier& model,
                                       std::span<const SceneRecord> scenes,
                                       const TrainOptions& opts) {
  for (const auto& s : scenes) {
    if (s.appearance.size() != s.tracklets.size()) {
      throw InvalidInput("train_classifier: scene " + s.video_id +
                         " has no appearance features");
    }
  }
  return run_training(
      model.params(), scenes, opts,
      [&](ad::Tape& tape, const SceneRecord& s) {
        return classifier_video_loss(tape, model, s, opts.lambda_att);
      },
      "train-cls");
}

std::vector<EpochLog> train_grounding(GroundingModel& model,
                                      std::span<const SceneRecord> scenes,
                                      const TrainOptions& opts) {
  for (const auto& s : scenes) {
    if (s.frame_features.rows() != s.frame_count) {
      throw InvalidInput("train_grounding: scene " + s.video_id +
                         " has no frame features");
    }
  }
  return run_training(
      model.params(), scenes, opts,
      [&](ad::Tape& tape, const SceneRecord& s) {
        return grounding_video_loss(tape, model, s);
      },
      "train-grd");
}

std::string loss_log_csv(std::span<const EpochLog> logs) {
  std::ostringstream out;
  out.precision(10);
  out << "epoch,loss,lr,steps\n";
  for (const auto& l : logs) {
    out << l.epoch << "," << l.loss << "," << l.lr << "," << l.steps << "\n";
  }
  return out.str();
}

}  // namespace vidsgg
