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

#include "vidsgg/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "vidsgg/classifier.hpp"
#include "vidsgg/errors.hpp"

namespace vidsgg {

GroundingConfig GroundingConfig::desk() {
  GroundingConfig c;
  c.word_dim = 32;
  c.frame_dim = 64;
  c.model_dim = 64;
  c.heads = 4;
  c.mlp_hidden = 64;
  c.dilations = {1, 2, 4, 8, 16};
  return c;
}

void GroundingConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw InvalidInput("grounding config: " + what);
  };
  if (entity_categories < 1 || predicate_categories < 1) fail("category counts");
  if (bins < 1) fail("bins must be >= 1");
  if (heads < 1 || model_dim % heads != 0) fail("heads must divide model_dim");
  if (word_dim < 1 || frame_dim < 1 || mlp_hidden < 1) fail("dimensions");
  for (int d : dilations) {
    if (d < 1) fail("dilations must be >= 1");
  }
}

int bin_of(double center, int bins) {
  const int b = static_cast<int>(std::floor(center * bins));
  return std::clamp(b, 0, bins - 1);
}

std::vector<std::optional<TimeSlot>> assign_bins(std::span<const TimeSlot> slots,
                                                 int bins) {
  if (bins < 1) throw InvalidInput("assign_bins: bins must be >= 1");
  std::vector<std::optional<TimeSlot>> out(bins);
  for (const TimeSlot& s : slots) {
    if (!s.valid()) throw InvalidInput("assign_bins: invalid slot");
    auto& cell = out[bin_of(s.center(), bins)];
    if (!cell || s.length() > cell->length()) cell = s;
  }
  return out;
}

// ---- model -------------------------------------------------------------------

GroundingModel::GroundingModel(const GroundingConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(cfg_.seed);
  const int d = cfg_.model_dim;
  const int h = cfg_.mlp_hidden;
  const int k = cfg_.bins;
  entity_embedding_ = &store_.add(
      "grd.entity_embedding",
      random_unit_embeddings(cfg_.entity_categories, cfg_.word_dim,
                             cfg_.seed ^ 0x9e3779b97f4a7c15ULL),
      false);
  predicate_embedding_ = &store_.add(
      "grd.predicate_embedding",
      random_unit_embeddings(cfg_.predicate_categories, cfg_.word_dim,
                             cfg_.seed ^ 0xc2b2ae3d27d4eb4fULL),
      false);
  mlp_w_ = nn::Mlp(store_, "grd.mlp_w", cfg_.word_dim, h, cfg_.word_dim, rng);
  mlp_t_ = nn::Mlp(store_, "grd.mlp_t", 2, h, cfg_.word_dim, rng);
  frame_in_ = nn::Linear(store_, "grd.frame_in", cfg_.frame_dim, d, rng);
  frame_encoder_ =
      nn::EncoderLayer(store_, "grd.frame_encoder", d, cfg_.heads, h, rng);
  query_in_ = nn::Linear(store_, "grd.query_in", cfg_.word_dim, d, rng);
  query_encoder_ =
      nn::EncoderLayer(store_, "grd.query_encoder", d, cfg_.heads, h, rng);
  cross_ = nn::MultiHeadAttention(store_, "grd.cross", d, d, d, cfg_.heads, rng);
  fuse_out_ = nn::Linear(store_, "grd.fuse", 3 * d, d, rng);
  for (std::size_t i = 0; i < cfg_.dilations.size(); ++i) {
    trunk_.emplace_back(store_, "grd.trunk." + std::to_string(i), d, d, 3,
                        cfg_.dilations[i], rng);
  }
  cls_ = nn::Linear(store_, "grd.cls", d, k, rng);
  reg_ = nn::Linear(store_, "grd.reg", d, 2 * k, rng);
  conf_ = nn::Linear(store_, "grd.conf", d, k, rng);
}

void GroundingModel::set_entity_embeddings(const Matrix& table) {
  if (table.rows() != entity_embedding_->value.rows() ||
      table.cols() != entity_embedding_->value.cols() || !table.allFinite()) {
    throw InvalidInput("grounding: entity embedding shape mismatch");
  }
  entity_embedding_->value = table;
}

void GroundingModel::set_predicate_embeddings(const Matrix& table) {
  if (table.rows() != predicate_embedding_->value.rows() ||
      table.cols() != predicate_embedding_->value.cols() || !table.allFinite()) {
    throw InvalidInput("grounding: predicate embedding shape mismatch");
  }
  predicate_embedding_->value = table;
}

ad::Var GroundingModel::query_feature(ad::Tape& tape,
                                      const GroundingQuery& q) const {
  if (!q.overlap.valid()) throw InvalidInput("query_feature: invalid overlap");
  if (q.subject_category < 0 || q.subject_category >= cfg_.entity_categories ||
      q.object_category < 0 || q.object_category >= cfg_.entity_categories ||
      q.predicate_category < 0 ||
      q.predicate_category >= cfg_.predicate_categories) {
    throw InvalidInput("query_feature: category out of range");
  }
  const ad::Var ent = tape.param(*entity_embedding_);
  const ad::Var pred = tape.param(*predicate_embedding_);
  const ad::Var tokens = ad::concat_rows(
      {ad::gather_rows(ent, {q.subject_category}),
       ad::gather_rows(pred, {q.predicate_category}),
       ad::gather_rows(ent, {q.object_category})});
  Matrix se(1, 2);
  se << q.overlap.start, q.overlap.end;
  const ad::Var time = mlp_t_(tape, tape.constant(std::move(se)));
  return ad::add(mlp_w_(tape, tokens), ad::broadcast_rows(time, 3));
}

ad::Var GroundingModel::encode_frames(ad::Tape& tape,
                                      const Matrix& frames) const {
  if (frames.rows() < 1 || frames.cols() != cfg_.frame_dim) {
    throw InvalidInput("multimodal_fuse: frame features must be T x " +
                       std::to_string(cfg_.frame_dim));
  }
  ad::Var x = frame_in_(tape, tape.constant(frames));
  if (cfg_.frame_positions) {
    x = ad::add(x, tape.constant(nn::sinusoidal_positions(
                       static_cast<int>(frames.rows()), cfg_.model_dim)));
  }
  return frame_encoder_(tape, x);
}

ad::Var GroundingModel::fuse(ad::Tape& tape, const ad::Var& encoded_frames,
                             const ad::Var& query_feature) const {
  // Token positions keep the subject and object roles apart.
  ad::Var q = ad::add(query_in_(tape, query_feature),
                      tape.constant(nn::sinusoidal_positions(3, cfg_.model_dim)));
  q = query_encoder_(tape, q);
  const ad::Var a = cross_(tape, encoded_frames, q);
  return fuse_out_(
      tape, ad::concat_cols({encoded_frames, a, ad::mul(encoded_frames, a)}));
}

HeadVars GroundingModel::head(ad::Tape& tape, const ad::Var& fused) const {
  ad::Var x = fused;
  for (const auto& conv : trunk_) x = ad::add(x, ad::relu(conv(tape, x)));
  const Eigen::Index t = x.rows();
  const int k = cfg_.bins;
  Matrix position(t, 2 * k);
  for (Eigen::Index r = 0; r < t; ++r) {
    position.row(r).setConstant((static_cast<double>(r) + 0.5) /
                                static_cast<double>(t));
  }
  HeadVars out;
  out.cls = ad::sigmoid(cls_(tape, x));
  out.reg = ad::add(reg_(tape, x), tape.constant(std::move(position)));
  out.conf = ad::sigmoid(conf_(tape, x));
  return out;
}

HeadVars GroundingModel::forward(ad::Tape& tape, const ad::Var& encoded_frames,
                                 const GroundingQuery& q) const {
  return head(tape, fuse(tape, encoded_frames, query_feature(tape, q)));
}

std::vector<HeadOutput> GroundingModel::predict(
    const Matrix& frames, std::span<const GroundingQuery> queries) const {
  std::vector<HeadOutput> out;
  if (queries.empty()) return out;
  ad::Tape tape;
  const ad::Var encoded = encode_frames(tape, frames);
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(forward(tape, encoded, q).values());
  return out;
}

// ---- loss / decoding -----------------------------------------------------------

std::vector<int> positive_frames(TimeSlot target, int frame_count) {
  std::vector<int> pos;
  for (int t = 0; t < frame_count; ++t) {
    const double c = (t + 0.5) / frame_count;
    if (c >= target.start && c < target.end) pos.push_back(t);
  }
  if (pos.empty()) {
    pos.push_back(std::clamp(
        static_cast<int>(std::floor(target.center() * frame_count)), 0,
        frame_count - 1));
  }
  return pos;
}

std::optional<TimeSlot> normalize_slot(double a, double b) {
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  if (a > b) std::swap(a, b);
  if (!(b > a)) return std::nullopt;
  return TimeSlot{a, b};
}

namespace {

void check_loss_shapes(const Matrix& cls, const Matrix& reg, const Matrix& conf,
                       std::size_t targets) {
  const Eigen::Index k = cls.cols();
  if (static_cast<Eigen::Index>(targets) != k || conf.cols() != k ||
      reg.cols() != 2 * k || cls.rows() < 1 || reg.rows() != cls.rows() ||
      conf.rows() != cls.rows()) {
    throw InvalidInput("grounding_loss: targets/head shape mismatch");
  }
}

}  // namespace

Matrix confidence_targets(const Matrix& reg,
                          const std::vector<std::optional<TimeSlot>>& targets) {
  const Eigen::Index k = static_cast<Eigen::Index>(targets.size());
  if (reg.cols() != 2 * k || reg.rows() < 1) {
    throw InvalidInput("confidence_targets: targets/reg shape mismatch");
  }
  const int frames = static_cast<int>(reg.rows());
  Matrix out = Matrix::Zero(reg.rows(), k);
  for (Eigen::Index b = 0; b < k; ++b) {
    if (!targets[b]) continue;
    for (int t : positive_frames(*targets[b], frames)) {
      const auto pred = normalize_slot(reg(t, 2 * b), reg(t, 2 * b + 1));
      out(t, b) = pred ? temporal_iou(*pred, *targets[b]) : 0.0;
    }
  }
  return out;
}

ad::Var grounding_loss(const HeadVars& head,
                       const std::vector<std::optional<TimeSlot>>& targets) {
  check_loss_shapes(head.cls.value(), head.reg.value(), head.conf.value(),
                    targets.size());
  return grounding_loss(head, targets,
                        confidence_targets(head.reg.value(), targets));
}

ad::Var grounding_loss(const HeadVars& head,
                       const std::vector<std::optional<TimeSlot>>& targets,
                       const Matrix& conf_target) {
  check_loss_shapes(head.cls.value(), head.reg.value(), head.conf.value(),
                    targets.size());
  const Eigen::Index t_count = head.cls.rows();
  const Eigen::Index k = head.cls.cols();
  if (conf_target.rows() != t_count || conf_target.cols() != k) {
    throw InvalidInput("grounding_loss: confidence target shape mismatch");
  }
  const int frames = static_cast<int>(t_count);
  const double kk = static_cast<double>(k);
  Matrix cls_target = Matrix::Zero(t_count, k);
  const Matrix cls_weight =
      Matrix::Constant(t_count, k, 1.0 / (static_cast<double>(t_count) * kk));
  Matrix reg_target = Matrix::Zero(t_count, 2 * k);
  Matrix reg_weight = Matrix::Zero(t_count, 2 * k);
  Matrix conf_weight = Matrix::Zero(t_count, k);
  for (Eigen::Index b = 0; b < k; ++b) {
    if (!targets[b]) continue;
    const TimeSlot g = *targets[b];
    for (Eigen::Index t = 0; t < t_count; ++t) {
      const double c = (t + 0.5) / static_cast<double>(t_count);
      if (c >= g.start && c < g.end) cls_target(t, b) = 1.0;
    }
    const std::vector<int> pos = positive_frames(g, frames);
    const double np = static_cast<double>(pos.size());
    for (int t : pos) {
      cls_target(t, b) = 1.0;
      reg_target(t, 2 * b) = g.start;
      reg_target(t, 2 * b + 1) = g.end;
      reg_weight(t, 2 * b) = reg_weight(t, 2 * b + 1) = 1.0 / (2.0 * np * kk);
      conf_weight(t, b) = 1.0 / (np * kk);
    }
  }
  ad::Var loss = ad::weighted_bce(head.cls, cls_target, cls_weight);
  loss = ad::add(loss, ad::weighted_l1(head.reg, reg_target, reg_weight));
  loss = ad::add(loss, ad::weighted_bce(head.conf, conf_target, conf_weight));
  return loss;
}

std::vector<GroundedSlot> decode_slots(const HeadOutput& head) {
  const Eigen::Index k = head.cls.cols();
  std::vector<GroundedSlot> out;
  for (Eigen::Index b = 0; b < k; ++b) {
    Eigen::Index best = 0;
    for (Eigen::Index t = 1; t < head.cls.rows(); ++t) {
      if (head.cls(t, b) > head.cls(best, b)) best = t;
    }
    if (head.cls.rows() == 0) break;
    const auto slot = normalize_slot(head.reg(best, 2 * b), head.reg(best, 2 * b + 1));
    if (!slot) continue;
    out.push_back({*slot, head.cls(best, b) * head.conf(best, b),
                   static_cast<int>(b)});
  }
  return out;
}

std::vector<GroundedSlot> temporal_nms(std::vector<GroundedSlot> slots,
                                       double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw InvalidInput("temporal_nms: threshold must be in (0, 1]");
  }
  std::stable_sort(slots.begin(), slots.end(),
                   [](const GroundedSlot& a, const GroundedSlot& b) {
                     return a.score > b.score;
                   });
  std::vector<GroundedSlot> kept;
  for (const auto& s : slots) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (temporal_iou(s.slot, k.slot) > threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(s);
  }
  return kept;
}

// ---- inference -------------------------------------------------------------------

std::vector<Candidate> collect_candidates(std::span<const Tracklet> entities,
                                          int frame_count,
                                          std::span<const ClassifiedQuery> queries,
                                          int k_keep) {
  if (k_keep < 1) throw InvalidInput("collect_candidates: k_keep must be >= 1");
  std::vector<Candidate> out;
  std::map<std::tuple<int, int, int>, std::size_t> seen;
  const int n = static_cast<int>(entities.size());
  for (const auto& q : queries) {
    if (q.subject < 0 || q.subject >= n || q.object < 0 || q.object >= n) {
      throw InvalidInput("collect_candidates: entity index out of range");
    }
    if (q.subject == q.object) continue;
    const auto frames =
        intersect(entities[q.subject].frames(), entities[q.object].frames());
    if (!frames) continue;
    const TimeSlot overlap = TimeSlot::from_frames(*frames, frame_count);
    std::vector<int> order(q.probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return q.probs(a) > q.probs(b); });
    const int keep = std::min<int>(k_keep, static_cast<int>(order.size()));
    for (int r = 0; r < keep; ++r) {
      const int p = order[r];
      const auto key = std::make_tuple(q.subject, p, q.object);
      auto it = seen.find(key);
      if (it != seen.end()) {
        out[it->second].probability =
            std::max(out[it->second].probability, q.probs(p));
        continue;
      }
      seen.emplace(key, out.size());
      out.push_back({q.subject, q.object, p, q.probs(p), overlap});
    }
  }
  return out;
}

GroundingQuery make_query(const Candidate& c,
                          std::span<const Tracklet> entities) {
  return {entities[c.subject].category, c.predicate,
          entities[c.object].category, c.overlap};
}

std::vector<RelationTriplet> ground_candidate(const Candidate& c,
                                              std::span<const Tracklet> entities,
                                              int frame_count,
                                              std::span<const GroundedSlot> grounded,
                                              const InferenceOptions& opts) {
  double best = 0.0;
  for (const auto& g : grounded) best = std::max(best, g.score);
  if (best < opts.score_floor) return {};
  std::vector<GroundedSlot> pool;
  pool.reserve(grounded.size() + 1);
  pool.push_back({c.overlap, 1.0, -1});
  pool.insert(pool.end(), grounded.begin(), grounded.end());
  const auto kept = temporal_nms(std::move(pool), opts.nms_threshold);

  const Tracklet& sub = entities[c.subject];
  const Tracklet& obj = entities[c.object];
  const FrameRange overlap_frames = *intersect(sub.frames(), obj.frames());
  std::vector<RelationTriplet> out;
  std::vector<FrameRange> emitted;
  for (const auto& k : kept) {
    const auto clipped = intersect(k.slot, c.overlap);
    if (!clipped) continue;
    const auto frames =
        intersect(to_frames(*clipped, frame_count), overlap_frames);
    if (!frames) continue;
    if (std::find(emitted.begin(), emitted.end(), *frames) != emitted.end()) {
      continue;
    }
    emitted.push_back(*frames);
    RelationTriplet r;
    r.subject = sub.crop(*frames);
    r.object = obj.crop(*frames);
    r.predicate = c.predicate;
    r.slot = TimeSlot::from_frames(*frames, frame_count);
    r.score = c.probability * k.score;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RelationTriplet> infer_pipeline(
    std::span<const Tracklet> entities, int frame_count,
    std::span<const Candidate> candidates,
    std::span<const std::vector<GroundedSlot>> grounded,
    const InferenceOptions& opts) {
  if (grounded.size() != candidates.size()) {
    throw InvalidInput("infer_pipeline: one grounded list per candidate");
  }
  std::vector<RelationTriplet> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto part =
        ground_candidate(candidates[i], entities, frame_count, grounded[i], opts);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<RelationTriplet> vidvrd_mode(std::span<const Tracklet> entities,
                                         int frame_count,
                                         std::span<const ClassifiedQuery> queries,
                                         int k_keep) {
  const auto candidates =
      collect_candidates(entities, frame_count, queries, k_keep);
  InferenceOptions opts;
  opts.k_keep = k_keep;
  opts.score_floor = 0.0;
  std::vector<RelationTriplet> out;
  for (const auto& c : candidates) {
    auto part = ground_candidate(c, entities, frame_count, {}, opts);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace vidsgg
