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

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "vidsgg/errors.hpp"
#include "vidsgg/grounding.hpp"

namespace vidsgg {
namespace {

using testing::constant_tracklet;
using testing::random_matrix;

GroundingConfig tiny_config() {
  GroundingConfig c;
  c.entity_categories = 3;
  c.predicate_categories = 4;
  c.word_dim = 4;
  c.frame_dim = 5;
  c.model_dim = 8;
  c.heads = 2;
  c.mlp_hidden = 8;
  c.bins = 3;
  c.dilations = {1, 2};
  c.seed = 5;
  return c;
}

GroundedSlot gs(double s, double e, double score, int bin = 0) {
  return {{s, e}, score, bin};
}

// ---- bins ------------------------------------------------------------------------

TEST(AssignBins, Examples) {
  const std::vector<TimeSlot> one = {{0.25, 0.45}};
  const auto a = assign_bins(one, 5);
  ASSERT_TRUE(a[1].has_value());
  EXPECT_EQ(*a[1], one[0]);
  EXPECT_EQ(bin_of(0.4, 5), 2);
  EXPECT_EQ(bin_of(1.0, 5), 4);
  EXPECT_EQ(bin_of(0.0, 5), 0);
  const std::vector<TimeSlot> many = {{0.0, 0.2}, {0.5, 0.95}, {0.3, 0.4}};
  const auto k1 = assign_bins(many, 1);
  ASSERT_EQ(k1.size(), 1u);
  EXPECT_EQ(*k1[0], many[1]);
  EXPECT_THROW(assign_bins(many, 0), InvalidInput);
}

TEST(AssignBins, DistinctCentersRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<TimeSlot> slots;
    std::vector<int> used;
    for (int i = 0; i < 4; ++i) {
      const double a = u(rng), b = u(rng);
      const TimeSlot s{std::min(a, b), std::max(a, b)};
      if (!(s.length() > 0)) continue;
      const int bin = bin_of(s.center(), 10);
      if (std::find(used.begin(), used.end(), bin) != used.end()) continue;
      used.push_back(bin);
      slots.push_back(s);
    }
    const auto bins = assign_bins(slots, 10);
    int occupied = 0;
    for (const auto& b : bins) occupied += b.has_value() ? 1 : 0;
    EXPECT_EQ(occupied, static_cast<int>(slots.size()));
    for (const auto& s : slots) EXPECT_EQ(*bins[bin_of(s.center(), 10)], s);
  }
}

// ---- NMS and decoding ------------------------------------------------------------

TEST(TemporalNms, WorkedSuppression) {
  const auto kept = temporal_nms({gs(0.05, 0.5, 0.8), gs(0.0, 0.5, 0.9)}, 0.8);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].score, 0.9);
  EXPECT_NEAR(temporal_iou({0.0, 0.5}, {0.05, 0.5}), 0.9, 1e-12);
}

TEST(TemporalNms, DisjointKeptInScoreOrder) {
  const auto kept = temporal_nms({gs(0.0, 0.2, 0.3), gs(0.5, 0.7, 0.6)}, 0.8);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].score, 0.6);
  EXPECT_THROW(temporal_nms({}, 0.0), InvalidInput);
}

TEST(TemporalNms, PairwiseBoundAndIdempotence) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<GroundedSlot> slots;
    for (int i = 0; i < 12; ++i) {
      const double a = u(rng) * 0.9;
      slots.push_back(gs(a, a + 0.05 + u(rng) * 0.1, u(rng)));
    }
    const auto once = temporal_nms(slots, 0.8);
    for (std::size_t i = 0; i < once.size(); ++i) {
      for (std::size_t j = i + 1; j < once.size(); ++j) {
        EXPECT_LE(temporal_iou(once[i].slot, once[j].slot), 0.8);
      }
      if (i > 0) EXPECT_GE(once[i - 1].score, once[i].score);
    }
    const auto twice = temporal_nms(once, 0.8);
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      EXPECT_EQ(once[i].slot, twice[i].slot);
      EXPECT_EQ(once[i].score, twice[i].score);
    }
  }
}

TEST(DecodeSlots, Examples) {
  HeadOutput h;
  h.cls = Matrix::Zero(8, 2);
  h.reg = Matrix::Zero(8, 4);
  h.conf = Matrix::Constant(8, 2, 0.8);
  h.cls(5, 0) = 1.0;
  h.reg(5, 0) = 0.1;
  h.reg(5, 1) = 0.4;
  h.cls(2, 1) = 0.5;
  h.reg(2, 2) = 0.4;
  h.reg(2, 3) = 0.1;
  auto out = decode_slots(h);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].slot, (TimeSlot{0.1, 0.4}));
  EXPECT_NEAR(out[0].score, 0.8, 1e-15);
  EXPECT_EQ(out[1].slot, (TimeSlot{0.1, 0.4}));
  EXPECT_NEAR(out[1].score, 0.4, 1e-15);
  h.reg(2, 3) = 0.4;
  out = decode_slots(h);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].bin, 0);
}

TEST(NormalizeSlot, ClampAndSwap) {
  EXPECT_EQ(*normalize_slot(-0.2, 1.3), (TimeSlot{0.0, 1.0}));
  EXPECT_EQ(*normalize_slot(0.7, 0.2), (TimeSlot{0.2, 0.7}));
  EXPECT_FALSE(normalize_slot(1.2, 1.5).has_value());
  EXPECT_FALSE(normalize_slot(0.3, 0.3).has_value());
}

TEST(PositiveFrames, CentresInsideTarget) {
  EXPECT_EQ(positive_frames({0.25, 0.5}, 8), (std::vector<int>{2, 3}));
  EXPECT_EQ(positive_frames({0.30, 0.32}, 8), (std::vector<int>{2}));
}

// ---- loss -------------------------------------------------------------------------

TEST(GroundingLoss, PerfectHeadHasZeroRegression) {
  const int t = 10;
  const std::vector<std::optional<TimeSlot>> targets = {TimeSlot{0.2, 0.5}, std::nullopt};
  ad::Tape tape;
  Matrix cls = Matrix::Constant(t, 2, 1e-9), reg = Matrix::Zero(t, 4),
         conf = Matrix::Constant(t, 2, 0.5);
  for (int f : positive_frames(*targets[0], t)) {
    cls(f, 0) = 1.0 - 1e-9;
    reg(f, 0) = 0.2;
    reg(f, 1) = 0.5;
    conf(f, 0) = 1.0 - 1e-9;
  }
  HeadVars h{tape.constant(cls), tape.constant(reg), tape.constant(conf)};
  EXPECT_LT(grounding_loss(h, targets).scalar(), 1e-7);
}

TEST(GroundingLoss, NoTargetsIsAllNegativeCls) {
  std::mt19937_64 rng(3);
  const int t = 6;
  const Matrix cls = random_matrix(rng, t, 2).cwiseAbs().unaryExpr(
      [](double v) { return v / (1.0 + v); });
  ad::Tape tape;
  HeadVars h{tape.constant(cls), tape.constant(random_matrix(rng, t, 4)),
             tape.constant(Matrix::Constant(t, 2, 0.3))};
  const double expect = -(1.0 - cls.array()).log().sum() / (t * 2.0);
  EXPECT_NEAR(grounding_loss(h, {std::nullopt, std::nullopt}).scalar(), expect, 1e-12);
}

TEST(GroundingLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  const int t = 12, k = 3;
  ad::ParamStore store;
  ad::Parameter& cls = store.add("cls", random_matrix(rng, t, k));
  ad::Parameter& reg = store.add("reg", random_matrix(rng, t, 2 * k, 0.3).array() + 0.5);
  // Confidence at 0.5 makes the detached tIoU target first-order inert.
  ad::Parameter& conf = store.add("conf", Matrix::Zero(t, k));
  const std::vector<std::optional<TimeSlot>> targets = {TimeSlot{0.05, 0.3}, std::nullopt,
                                                        TimeSlot{0.6, 0.9}};
  auto run = [&](ad::Tape& tape) {
    HeadVars h{ad::sigmoid(tape.param(cls)), tape.param(reg), ad::sigmoid(tape.param(conf))};
    return grounding_loss(h, targets);
  };
  auto value = [&] {
    ad::Tape tape;
    return run(tape).scalar();
  };
  auto analytic = [&] {
    ad::Tape tape;
    tape.backward(run(tape));
  };
  const auto errs = testing::gradient_errors(store, value, analytic);
  EXPECT_LT(testing::max_error(errs), 1e-6) << testing::worst(errs);
}

TEST(GroundingLoss, ConfidenceTargets) {
  // T = 4, K = 2: bin 0 target (0, 0.5) covers frames 0 and 1.
  Matrix reg(4, 4);
  reg << 0.0, 0.5, 0.0, 0.0,
         0.25, 0.5, 0.0, 0.0,
         0.6, 0.4, 0.0, 0.0,
         0.3, 0.3, 0.0, 0.0;
  const std::vector<std::optional<TimeSlot>> targets = {TimeSlot{0.0, 0.5}, std::nullopt};
  const Matrix c = confidence_targets(reg, targets);
  EXPECT_DOUBLE_EQ(c(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(c(2, 0), 0.0);  // negative frame
  EXPECT_DOUBLE_EQ(c.col(1).sum(), 0.0);
}

TEST(GroundingLoss, ExplicitTargetMatchesDefault) {
  std::mt19937_64 rng(6);
  ad::Tape tape;
  const Matrix reg = random_matrix(rng, 8, 4, 0.3).array() + 0.5;
  HeadVars h{tape.constant(Matrix::Constant(8, 2, 0.3)), tape.constant(reg),
             tape.constant(Matrix::Constant(8, 2, 0.6))};
  const std::vector<std::optional<TimeSlot>> targets = {TimeSlot{0.1, 0.4}, TimeSlot{0.5, 0.9}};
  EXPECT_EQ(grounding_loss(h, targets).scalar(),
            grounding_loss(h, targets, confidence_targets(reg, targets)).scalar());
  EXPECT_THROW(grounding_loss(h, targets, Matrix::Zero(8, 3)), InvalidInput);
}

TEST(GroundingLoss, ShapeMismatchRejected) {
  ad::Tape tape;
  HeadVars h{tape.constant(Matrix::Zero(4, 2)), tape.constant(Matrix::Zero(4, 4)),
             tape.constant(Matrix::Zero(4, 2))};
  EXPECT_THROW(grounding_loss(h, {std::nullopt}), InvalidInput);
}

// ---- model ------------------------------------------------------------------------

TEST(GroundingModel, ZeroTimeBranchIgnoresOverlap) {
  GroundingModel m(tiny_config());
  GroundingQuery a{0, 1, 2, {0.1, 0.6}}, b{0, 1, 2, {0.3, 0.9}};
  {
    ad::Tape tape;
    EXPECT_GT((m.query_feature(tape, a).value() - m.query_feature(tape, b).value())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-6);
  }
  for (ad::Parameter* p : m.params().all()) {
    if (p->name.rfind("grd.mlp_t.", 0) == 0) p->value.setZero();
  }
  ad::Tape tape;
  EXPECT_EQ(m.query_feature(tape, a).value(), m.query_feature(tape, b).value());
}

TEST(GroundingModel, SingleFrameFusion) {
  GroundingModel m(tiny_config());
  std::mt19937_64 rng(5);
  ad::Tape tape;
  const ad::Var fused =
      m.multimodal_fuse(tape, random_matrix(rng, 1, 5), m.query_feature(tape, {0, 0, 1, {0, 1}}));
  EXPECT_EQ(fused.rows(), 1);
  EXPECT_EQ(fused.cols(), 8);
}

TEST(GroundingModel, FramePermutationEquivariantWithoutPositions) {
  GroundingConfig cfg = tiny_config();
  cfg.frame_positions = false;
  GroundingModel m(cfg);
  std::mt19937_64 rng(6);
  const Matrix f = random_matrix(rng, 6, 5);
  const std::vector<int> perm = {4, 2, 0, 5, 1, 3};
  Matrix g(6, 5);
  for (int i = 0; i < 6; ++i) g.row(i) = f.row(perm[i]);
  ad::Tape tape;
  const ad::Var q = m.query_feature(tape, {1, 2, 0, {0.2, 0.7}});
  const Matrix a = m.multimodal_fuse(tape, f, q).value();
  const Matrix b = m.multimodal_fuse(tape, g, q).value();
  for (int i = 0; i < 6; ++i) EXPECT_LT((b.row(i) - a.row(perm[i])).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GroundingModel, HeadShapesAndRanges) {
  GroundingModel m(tiny_config());
  std::mt19937_64 rng(7);
  const std::vector<GroundingQuery> qs = {{0, 0, 1, {0.0, 1.0}}, {2, 3, 1, {0.2, 0.5}}};
  const auto out = m.predict(random_matrix(rng, 16, 5), qs);
  ASSERT_EQ(out.size(), 2u);
  for (const auto& h : out) {
    EXPECT_EQ(h.cls.rows(), 16);
    EXPECT_EQ(h.cls.cols(), 3);
    EXPECT_EQ(h.reg.cols(), 6);
    EXPECT_TRUE((h.cls.array() > 0 && h.cls.array() < 1).all());
    EXPECT_TRUE((h.conf.array() > 0 && h.conf.array() < 1).all());
    EXPECT_LE(decode_slots(h).size(), 3u);
  }
  EXPECT_THROW(m.predict(random_matrix(rng, 16, 4), qs), InvalidInput);
}

TEST(GroundingModel, GradientMatchesFiniteDifferences) {
  GroundingModel m(tiny_config());
  std::mt19937_64 rng(8);
  const Matrix frames = random_matrix(rng, 10, 5);
  const GroundingQuery q{1, 2, 0, {0.1, 0.9}};
  const std::vector<std::optional<TimeSlot>> targets = {TimeSlot{0.1, 0.3}, std::nullopt,
                                                        TimeSlot{0.7, 0.9}};
  Matrix conf_target;
  {
    ad::Tape tape;
    conf_target = confidence_targets(
        m.forward(tape, m.encode_frames(tape, frames), q).reg.value(), targets);
  }
  auto run = [&](ad::Tape& tape) {
    return grounding_loss(m.forward(tape, m.encode_frames(tape, frames), q), targets,
                          conf_target);
  };
  auto value = [&] {
    ad::Tape tape;
    return run(tape).scalar();
  };
  auto analytic = [&] {
    ad::Tape tape;
    tape.backward(run(tape));
  };
  const auto errs = testing::gradient_errors(m.params(), value, analytic);
  EXPECT_LT(testing::max_error(errs), 1e-4) << testing::worst(errs);
}

TEST(GroundingConfig, Validation) {
  GroundingConfig c = tiny_config();
  c.bins = 0;
  EXPECT_THROW(GroundingModel{c}, InvalidInput);
  c = tiny_config();
  c.heads = 3;
  EXPECT_THROW(GroundingModel{c}, InvalidInput);
}

// ---- inference pipeline -------------------------------------------------------------

struct PipelineFixture : ::testing::Test {
  // Frames 0..40 of 40: subject [0, 30), object [10, 40) -> overlap [10, 30).
  std::vector<Tracklet> entities = {constant_tracklet(0, 0, 0, 30),
                                    constant_tracklet(1, 1, 10, 40),
                                    constant_tracklet(2, 2, 32, 40)};
  const int frames = 40;
  Candidate candidate() const { return {0, 1, 3, 0.5, {0.25, 0.75}}; }
};

TEST_F(PipelineFixture, LowGroundedScoresDropQuery) {
  const std::vector<GroundedSlot> g = {gs(0.3, 0.4, 0.15), gs(0.5, 0.6, 0.19)};
  InferenceOptions o;
  EXPECT_TRUE(ground_candidate(candidate(), entities, frames, g, o).empty());
  EXPECT_TRUE(ground_candidate(candidate(), entities, frames, {}, o).empty());
}

TEST_F(PipelineFixture, OverlapSlotAppendedAtFullScore) {
  const std::vector<GroundedSlot> g = {gs(0.3, 0.4, 0.6)};
  const auto out = ground_candidate(candidate(), entities, frames, g, InferenceOptions{});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].slot, (TimeSlot{0.25, 0.75}));
  EXPECT_NEAR(out[0].score, 0.5, 1e-15);
  EXPECT_NEAR(out[1].score, 0.3, 1e-15);
  EXPECT_EQ(out[0].subject.begin_frame, 10);
  EXPECT_EQ(out[0].subject.end_frame(), 30);
  EXPECT_EQ(out[1].object.begin_frame, 12);
  EXPECT_EQ(out[1].object.end_frame(), 16);
  EXPECT_EQ(out[1].predicate, 3);
}

TEST_F(PipelineFixture, NearDuplicateOfOverlapSuppressed) {
  // tIoU with the overlap (0.25, 0.75) is 0.45 / 0.5 = 0.9.
  const std::vector<GroundedSlot> g = {gs(0.25, 0.70, 0.9)};
  const auto out = ground_candidate(candidate(), entities, frames, g, InferenceOptions{});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].slot, (TimeSlot{0.25, 0.75}));
}

TEST_F(PipelineFixture, SlotsClippedToOverlap) {
  const std::vector<GroundedSlot> g = {gs(0.0, 0.4, 0.7), gs(0.6, 1.0, 0.5), gs(0.85, 0.95, 0.4)};
  const auto out = ground_candidate(candidate(), entities, frames, g, InferenceOptions{});
  ASSERT_EQ(out.size(), 3u);
  for (const auto& r : out) {
    EXPECT_GE(r.slot.start, 0.25);
    EXPECT_LE(r.slot.end, 0.75);
    EXPECT_EQ(r.subject.length(), r.object.length());
  }
}

TEST_F(PipelineFixture, CollectCandidates) {
  RowVector p(4);
  p << 0.1, 0.4, 0.2, 0.3;
  const std::vector<ClassifiedQuery> qs = {{0, 1, p}, {1, 1, p}, {0, 2, p}, {0, 1, p}};
  const auto c = collect_candidates(entities, frames, qs, 2);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].predicate, 1);
  EXPECT_EQ(c[1].predicate, 3);
  EXPECT_NEAR(c[0].probability, 0.4, 1e-15);
  EXPECT_EQ(c[0].overlap, (TimeSlot{0.25, 0.75}));
}

TEST_F(PipelineFixture, VidvrdModeEqualsPipelineWithoutGrounding) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ClassifiedQuery> qs;
    for (int j = 0; j < 5; ++j) {
      RowVector p = random_matrix(rng, 1, 4).array().exp();
      qs.push_back({static_cast<int>(rng() % 3), static_cast<int>(rng() % 3), p / p.sum()});
    }
    const auto cands = collect_candidates(entities, frames, qs, 2);
    InferenceOptions o;
    o.k_keep = 2;
    o.score_floor = 0.0;
    const std::vector<std::vector<GroundedSlot>> empty(cands.size());
    const auto a = vidvrd_mode(entities, frames, qs, 2);
    const auto b = infer_pipeline(entities, frames, cands, empty, o);
    EXPECT_EQ(a, b);
    for (const auto& r : a) EXPECT_EQ(r.subject.length(), r.object.length());
  }
}

TEST_F(PipelineFixture, VidvrdModeOneSlotPerNode) {
  RowVector p(4);
  p << 0.7, 0.1, 0.1, 0.1;
  const std::vector<ClassifiedQuery> qs = {{0, 1, p}, {0, 2, p}};
  const auto out = vidvrd_mode(entities, frames, qs, 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].slot, (TimeSlot{0.25, 0.75}));
  EXPECT_NEAR(out[0].score, 0.7, 1e-15);
}

TEST_F(PipelineFixture, InferPipelineRequiresOneListPerCandidate) {
  const std::vector<Candidate> c = {candidate()};
  EXPECT_THROW(infer_pipeline(entities, frames, c, {}, InferenceOptions{}), InvalidInput);
}

}  // namespace
}  // namespace vidsgg
