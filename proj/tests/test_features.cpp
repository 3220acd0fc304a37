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

#include <limits>
#include <random>

#include "test_util.hpp"
#include "vidsgg/errors.hpp"
#include "vidsgg/features.hpp"

namespace vidsgg {
namespace {

using testing::random_matrix;

TEST(SpatialFeature, ConstantBoxesHaveZeroOffsets) {
  const std::vector<Box> boxes(3, Box{0.1, 0.2, 0.3, 0.4});
  const Matrix f = spatial_feature(boxes);
  ASSERT_EQ(f.rows(), 3);
  ASSERT_EQ(f.cols(), kSpatialDim);
  EXPECT_EQ(f.rightCols(4).cwiseAbs().sum(), 0.0);
  EXPECT_EQ(f(2, 3), 0.4);
}

TEST(SpatialFeature, Offsets) {
  const std::vector<Box> boxes = {{0, 0, .1, .1}, {.1, .1, .2, .2}};
  const Matrix f = spatial_feature(boxes);
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(f(0, 4 + c), 0.1, 1e-15);
  EXPECT_EQ(f.row(1).rightCols(4).cwiseAbs().sum(), 0.0);
}

TEST(SpatialFeature, SingleFrameAndEmpty) {
  const std::vector<Box> one = {{.1, .2, .3, .4}};
  const Matrix f = spatial_feature(one);
  ASSERT_EQ(f.rows(), 1);
  EXPECT_EQ(f(0, 1), 0.2);
  EXPECT_EQ(f.rightCols(4).cwiseAbs().sum(), 0.0);
  EXPECT_THROW(spatial_feature(std::vector<Box>{}), InvalidInput);
}

TEST(ChunkPool, RowsAverageEqualChunks) {
  const Matrix p = chunk_pool_matrix(8, 4);
  for (int c = 0; c < 4; ++c) {
    EXPECT_NEAR(p.row(c).sum(), 1.0, 1e-15);
    EXPECT_EQ(p(c, 2 * c), 0.5);
    EXPECT_EQ(p(c, 2 * c + 1), 0.5);
  }
}

TEST(ChunkPool, ShortTrackletRepeatsFrames) {
  const Matrix p = chunk_pool_matrix(2, 4);
  for (int c = 0; c < 4; ++c) EXPECT_EQ(p.row(c).sum(), 1.0);
  EXPECT_EQ(p(0, 0), 1.0);
  EXPECT_EQ(p(3, 1), 1.0);
  const Matrix q = chunk_pool_matrix(1, 4);
  EXPECT_EQ(q.col(0).sum(), 4.0);
  EXPECT_THROW(chunk_pool_matrix(0, 4), InvalidInput);
}

TEST(ChunkPool, UnevenLengthsCoverEveryFrameOnce) {
  for (int l = 4; l < 40; ++l) {
    const Matrix p = chunk_pool_matrix(l, 4);
    for (int t = 0; t < l; ++t) {
      int owners = 0;
      for (int c = 0; c < 4; ++c) owners += p(c, t) > 0 ? 1 : 0;
      EXPECT_EQ(owners, 1) << "l=" << l << " t=" << t;
    }
  }
}

class TrackletEncoderTest : public ::testing::Test {
 protected:
  TrackletEncoderTest() {
    cfg_.appearance_dim = 5;
    cfg_.model_dim = 4;
    cfg_.hidden = 6;
    Rng rng(3);
    enc_ = TrackletEncoder(store_, "f", cfg_, rng);
  }
  FeatureConfig cfg_;
  ad::ParamStore store_;
  TrackletEncoder enc_;
};

TEST_F(TrackletEncoderTest, ShapesFollowLength) {
  std::mt19937_64 rng(1);
  for (int l : {1, 3, 9}) {
    ad::Tape tape;
    const auto out = enc_(tape, random_matrix(rng, l, 5),
                          spatial_feature(std::vector<Box>(l, Box{.1, .1, .2, .2})));
    EXPECT_EQ(out.sequence.rows(), l);
    EXPECT_EQ(out.sequence.cols(), 4);
    EXPECT_EQ(out.pooled.rows(), 1);
    EXPECT_EQ(out.pooled.cols(), 4);
  }
}

TEST_F(TrackletEncoderTest, ZeroParamsGiveZeroOutput) {
  for (ad::Parameter* p : store_.all()) p->value.setZero();
  std::mt19937_64 rng(2);
  ad::Tape tape;
  const auto out = enc_(tape, random_matrix(rng, 7, 5),
                        spatial_feature(std::vector<Box>(7, Box{.1, .1, .2, .2})));
  EXPECT_EQ(out.pooled.value().cwiseAbs().sum(), 0.0);
}

TEST_F(TrackletEncoderTest, ConstantInputGivesIdenticalRows) {
  std::mt19937_64 rng(3);
  const Matrix row = random_matrix(rng, 1, 5);
  const Matrix app = row.replicate(6, 1);
  ad::Tape tape;
  const auto out = enc_(tape, app, spatial_feature(std::vector<Box>(6, Box{.1, .1, .2, .2})));
  const Matrix& s = out.sequence.value();
  for (int r = 1; r < 6; ++r) EXPECT_LT((s.row(r) - s.row(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(TrackletEncoderTest, PermutingWithinChunkKeepsPooled) {
  // With one frame per conv window the sequence is per-frame; use kernel 1.
  FeatureConfig cfg = cfg_;
  cfg.conv_kernel = 1;
  ad::ParamStore store;
  Rng init(4);
  TrackletEncoder enc(store, "g", cfg, init);
  std::mt19937_64 rng(5);
  Matrix app = random_matrix(rng, 8, 5);
  std::vector<Box> boxes(8, Box{.1, .1, .2, .2});
  ad::Tape tape;
  const Matrix a = enc(tape, app, spatial_feature(boxes)).pooled.value();
  app.row(2).swap(app.row(3));
  const Matrix b = enc(tape, app, spatial_feature(boxes)).pooled.value();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(TrackletEncoderTest, RejectsBadShapes) {
  ad::Tape tape;
  EXPECT_THROW(enc_(tape, Matrix::Zero(3, 4), Matrix::Zero(3, kSpatialDim)), InvalidInput);
  EXPECT_THROW(enc_(tape, Matrix::Zero(3, 5), Matrix::Zero(2, kSpatialDim)), InvalidInput);
  Matrix bad = Matrix::Zero(3, 5);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(enc_(tape, bad, Matrix::Zero(3, kSpatialDim)), InvalidInput);
}

TEST_F(TrackletEncoderTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  const Matrix app = random_matrix(rng, 6, 5);
  std::vector<Box> boxes;
  for (int f = 0; f < 6; ++f) boxes.push_back({0.1 + 0.01 * f, 0.2, 0.4 + 0.01 * f, 0.5});
  const Matrix sp = spatial_feature(boxes);
  const Matrix w_seq = random_matrix(rng, 6, 4), w_pool = random_matrix(rng, 1, 4);
  auto run = [&](ad::Tape& tape) {
    const auto out = enc_(tape, app, sp);
    return ad::add(ad::sum(ad::mul_const(out.sequence, w_seq)),
                   ad::sum(ad::mul_const(out.pooled, w_pool)));
  };
  auto value = [&] {
    ad::Tape tape;
    return run(tape).scalar();
  };
  auto analytic = [&] {
    ad::Tape tape;
    tape.backward(run(tape));
  };
  const auto errs = testing::gradient_errors(store_, value, analytic);
  EXPECT_LT(testing::max_error(errs), 1e-4) << testing::worst(errs);
}

}  // namespace
}  // namespace vidsgg
