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

// Exercises the shared library through its C header only.

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include <unistd.h>

#include "vidsgg/vidsgg.h"

namespace {

namespace fs = std::filesystem;

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  vsg_string_free(s);
  return out;
}

class CApi : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fs::temp_directory_path() /
                        ("vidsgg_capi_" + std::to_string(::getpid())));
    fs::remove_all(*dir_);
    ASSERT_EQ(vsg_synth(dir_->c_str(), R"({"seed": 4, "frames": 32})", 6, 3), VSG_OK)
        << vsg_last_error();
  }
  static void TearDownTestSuite() {
    fs::remove_all(*dir_);
    delete dir_;
  }
  static std::string manifest() { return (*dir_ / "manifest.json").string(); }
  static std::string path(const char* name) { return (*dir_ / name).string(); }

  static fs::path* dir_;
};

fs::path* CApi::dir_ = nullptr;

constexpr const char* kClassifier =
    R"({"queries": 6, "model_dim": 16, "query_dim": 16, "heads": 2, "encoder_layers": 1,
        "decoder_layers": 1, "mlp_hidden": 16, "word_dim": 8, "feature_hidden": 16,
        "appearance_dim": 64})";
constexpr const char* kGrounding =
    R"({"word_dim": 8, "model_dim": 16, "heads": 2, "mlp_hidden": 16, "bins": 4,
        "dilations": [1, 2], "frame_dim": 64})";

int count_epochs(void* user, int, double loss, double) {
  EXPECT_TRUE(loss == loss);
  ++*static_cast<int*>(user);
  return 0;
}

int stop_now(void*, int, double, double) { return 1; }

TEST_F(CApi, Version) { EXPECT_STRNE(vsg_version(), ""); }

TEST_F(CApi, DatasetOpenSizesAndStats) {
  vsg_dataset* ds = nullptr;
  ASSERT_EQ(vsg_dataset_open(manifest().c_str(), 0, &ds), VSG_OK) << vsg_last_error();
  EXPECT_EQ(vsg_dataset_size(ds, "train"), 6);
  EXPECT_EQ(vsg_dataset_size(ds, "val"), 3);
  EXPECT_EQ(vsg_dataset_size(ds, "test"), -1);
  char* json = nullptr;
  ASSERT_EQ(vsg_dataset_stats(ds, "train", 10, &json), VSG_OK);
  EXPECT_NE(take(json).find("samples"), std::string::npos);
  EXPECT_EQ(vsg_dataset_stats(ds, "train", 0, &json), VSG_ERR_USAGE);
  vsg_dataset_free(ds);
}

TEST_F(CApi, ErrorCodes) {
  vsg_dataset* ds = nullptr;
  EXPECT_EQ(vsg_dataset_open(path("missing.json").c_str(), 0, &ds), VSG_ERR_DATA);
  EXPECT_NE(std::string(vsg_last_error()), "");
  EXPECT_EQ(vsg_dataset_open(nullptr, 0, &ds), VSG_ERR_USAGE);
  vsg_classifier* c = nullptr;
  EXPECT_EQ(vsg_classifier_create("{not json", &c), VSG_ERR_USAGE);
  EXPECT_EQ(vsg_classifier_create(R"({"heads": 3, "model_dim": 16})", &c), VSG_ERR_USAGE);
  EXPECT_EQ(vsg_classifier_load(path("missing.ckpt").c_str(), &c), VSG_ERR_DATA);
  EXPECT_EQ(vsg_synth(path("bad").c_str(), R"({"multi_instance_prob": 3})", 1, 0),
            VSG_ERR_USAGE);
}

TEST_F(CApi, TrainInferEvaluateRoundTrip) {
  vsg_dataset* ds = nullptr;
  ASSERT_EQ(vsg_dataset_open(manifest().c_str(), 1, &ds), VSG_OK) << vsg_last_error();

  vsg_classifier* c = nullptr;
  ASSERT_EQ(vsg_classifier_create(kClassifier, &c), VSG_OK) << vsg_last_error();
  int epochs = 0;
  ASSERT_EQ(vsg_classifier_train(c, ds, R"({"epochs": 2})", count_epochs, &epochs), VSG_OK)
      << vsg_last_error();
  EXPECT_EQ(epochs, 2);
  EXPECT_EQ(vsg_classifier_train(c, ds, R"({"epochs": 3})", stop_now, nullptr),
            VSG_ERR_INTERNAL);
  ASSERT_EQ(vsg_classifier_save(c, path("c.ckpt").c_str()), VSG_OK);
  vsg_classifier* c2 = nullptr;
  ASSERT_EQ(vsg_classifier_load(path("c.ckpt").c_str(), &c2), VSG_OK) << vsg_last_error();
  char* cfg1 = nullptr;
  char* cfg2 = nullptr;
  vsg_classifier_config(c, &cfg1);
  vsg_classifier_config(c2, &cfg2);
  EXPECT_EQ(take(cfg1), take(cfg2));
  vsg_grounding* g2 = nullptr;
  EXPECT_EQ(vsg_grounding_load(path("c.ckpt").c_str(), &g2), VSG_ERR_DATA);

  vsg_grounding* g = nullptr;
  ASSERT_EQ(vsg_grounding_create(kGrounding, &g), VSG_OK) << vsg_last_error();
  ASSERT_EQ(vsg_grounding_train(g, ds, R"({"epochs": 1})", nullptr, nullptr), VSG_OK)
      << vsg_last_error();

  vsg_predictions* p = nullptr;
  ASSERT_EQ(vsg_infer(c2, g, ds, "val", R"({"mode": "big"})", &p), VSG_OK) << vsg_last_error();
  EXPECT_GE(vsg_predictions_count(p), 0);
  ASSERT_EQ(vsg_predictions_save(p, ds, path("p.json").c_str()), VSG_OK);
  vsg_predictions* loaded = nullptr;
  ASSERT_EQ(vsg_predictions_load(path("p.json").c_str(), ds, &loaded), VSG_OK);
  EXPECT_EQ(vsg_predictions_count(loaded), vsg_predictions_count(p));

  vsg_report* r1 = nullptr;
  vsg_report* r2 = nullptr;
  ASSERT_EQ(vsg_evaluate(ds, "val", p, 1, &r1), VSG_OK) << vsg_last_error();
  ASSERT_EQ(vsg_evaluate(ds, "val", loaded, 2, &r2), VSG_OK) << vsg_last_error();
  char* j1 = nullptr;
  char* j2 = nullptr;
  vsg_report_json(r1, &j1);
  vsg_report_json(r2, &j2);
  EXPECT_EQ(take(j1), take(j2));
  double map = -1.0;
  EXPECT_EQ(vsg_report_metric(r1, "mAP", &map), VSG_OK);
  EXPECT_GE(map, 0.0);
  EXPECT_LE(map, 1.0);
  EXPECT_EQ(vsg_report_metric(r1, "nope", &map), VSG_ERR_USAGE);
  char* table = nullptr;
  vsg_report_table(r1, &table);
  EXPECT_NE(take(table).find("mAP"), std::string::npos);
  char* csv = nullptr;
  vsg_report_per_video_csv(r1, &csv);
  EXPECT_FALSE(take(csv).empty());

  vsg_predictions* vid = nullptr;
  EXPECT_EQ(vsg_infer(c2, nullptr, ds, "val", R"({"mode": "vidvrd"})", &vid), VSG_OK);
  EXPECT_EQ(vsg_infer(c2, nullptr, ds, "val", R"({"mode": "big"})", &p), VSG_ERR_USAGE);
  EXPECT_EQ(vsg_infer(c2, g, ds, "val", R"({"mode": "other"})", &p), VSG_ERR_USAGE);

  vsg_report_free(r1);
  vsg_report_free(r2);
  vsg_predictions_free(vid);
  vsg_predictions_free(loaded);
  vsg_predictions_free(p);
  vsg_grounding_free(g);
  vsg_classifier_free(c2);
  vsg_classifier_free(c);
  vsg_dataset_free(ds);
}

TEST_F(CApi, VocabularyMismatchRejected) {
  vsg_dataset* ds = nullptr;
  ASSERT_EQ(vsg_dataset_open(manifest().c_str(), 1, &ds), VSG_OK);
  vsg_classifier* c = nullptr;
  ASSERT_EQ(vsg_classifier_create(R"({"entity_categories": 4, "queries": 4, "model_dim": 16,
      "query_dim": 16, "heads": 2, "mlp_hidden": 16, "word_dim": 8, "feature_hidden": 16,
      "encoder_layers": 1, "decoder_layers": 1, "appearance_dim": 64})", &c), VSG_OK);
  EXPECT_EQ(vsg_classifier_train(c, ds, R"({"epochs": 1})", nullptr, nullptr), VSG_ERR_USAGE);
  EXPECT_NE(std::string(vsg_last_error()).find("categor"), std::string::npos) << vsg_last_error();
  vsg_classifier_free(c);
  vsg_dataset_free(ds);
}

TEST_F(CApi, NullHandlesAreUsageErrors) {
  vsg_report* r = nullptr;
  EXPECT_EQ(vsg_evaluate(nullptr, "val", nullptr, 1, &r), VSG_ERR_USAGE);
  double v = 0;
  EXPECT_EQ(vsg_report_metric(nullptr, "mAP", &v), VSG_ERR_USAGE);
  vsg_dataset_free(nullptr);
  vsg_classifier_free(nullptr);
  vsg_string_free(nullptr);
}

}  // namespace
