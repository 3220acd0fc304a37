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

#include "vidsgg/vidsgg.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "vidsgg/config_json.hpp"
#include "vidsgg/errors.hpp"
#include "vidsgg/pipeline.hpp"

struct vsg_dataset {
  vidsgg::fs::path manifest_path;
  vidsgg::Manifest manifest;
  std::vector<vidsgg::SceneRecord> train;
  std::vector<vidsgg::SceneRecord> val;
};

struct vsg_classifier {
  std::unique_ptr<vidsgg::Classifier> model;
};

struct vsg_grounding {
  std::unique_ptr<vidsgg::GroundingModel> model;
};

struct vsg_predictions {
  vidsgg::Predictions preds;
};

struct vsg_report {
  vidsgg::EvalReport report;
};

namespace {

using namespace vidsgg;

thread_local std::string g_last_error;

class StopRequested : public std::runtime_error {
 public:
  StopRequested() : std::runtime_error("training stopped by callback") {}
};

template <typename F>
vsg_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return VSG_OK;
  } catch (const InvalidInput& e) {
    g_last_error = e.what();
    return VSG_ERR_USAGE;
  } catch (const DataError& e) {
    g_last_error = e.what();
    return VSG_ERR_DATA;
  } catch (const NumericError& e) {
    g_last_error = e.what();
    return VSG_ERR_NUMERIC;
  } catch (const Json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return VSG_ERR_DATA;
  } catch (const fs::filesystem_error& e) {
    g_last_error = e.what();
    return VSG_ERR_DATA;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return VSG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return VSG_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

Json parse_options(const char* text, const char* what) {
  if (text == nullptr || *text == '\0') return Json::object();
  try {
    Json j = Json::parse(text);
    if (!j.is_object()) throw InvalidInput(std::string(what) + ": not an object");
    return j;
  } catch (const Json::parse_error& e) {
    throw InvalidInput(std::string(what) + ": " + e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const std::vector<SceneRecord>& split_of(const vsg_dataset* ds,
                                         const char* split) {
  require(ds != nullptr && split != nullptr, "dataset and split required");
  const std::string s(split);
  if (s == "train") return ds->train;
  if (s == "val") return ds->val;
  throw InvalidInput("unknown split '" + s + "' (expected train or val)");
}

void check_vocabulary(const vsg_dataset* ds, int entities, int predicates,
                      const char* model) {
  const auto& v = ds->manifest.vocabulary;
  if (static_cast<int>(v.entities.size()) != entities ||
      static_cast<int>(v.predicates.size()) != predicates) {
    throw InvalidInput(std::string(model) + " expects " +
                       std::to_string(entities) + " entity and " +
                       std::to_string(predicates) +
                       " predicate categories; dataset has " +
                       std::to_string(v.entities.size()) + " and " +
                       std::to_string(v.predicates.size()));
  }
}

std::function<void(const EpochLog&)> epoch_hook(vsg_epoch_fn fn, void* user) {
  if (fn == nullptr) return {};
  return [fn, user](const EpochLog& log) {
    if (fn(user, log.epoch, log.loss, log.lr) != 0) throw StopRequested();
  };
}

constexpr const char* kClassifierKind = "classifier";
constexpr const char* kGroundingKind = "grounding";

Json checkpoint_config(const char* kind, Json model) {
  return Json{{"kind", kind}, {"model", std::move(model)}};
}

Json read_checkpoint_model(const char* path, const char* kind) {
  require(path != nullptr, "checkpoint path required");
  const Json cfg = load_checkpoint_config(path);
  if (!cfg.is_object() || cfg.value("kind", "") != kind) {
    throw DataError(std::string(path) + ": not a " + kind + " checkpoint");
  }
  return cfg.at("model");
}

}  // namespace

extern "C" {

const char* vsg_version(void) { return "0.1.0"; }

const char* vsg_last_error(void) { return g_last_error.c_str(); }

void vsg_string_free(char* s) { std::free(s); }

vsg_status vsg_synth(const char* out_dir, const char* synth_json,
                     int train_scenes, int val_scenes) {
  return guard([&] {
    require(out_dir != nullptr, "output directory required");
    require(train_scenes >= 0 && val_scenes >= 0, "scene counts must be >= 0");
    const SynthConfig cfg = SynthConfig::from_json(parse_options(synth_json, "synth"));
    write_synthetic_dataset(out_dir, cfg, train_scenes, val_scenes);
  });
}

vsg_status vsg_dataset_open(const char* manifest_path, int with_features,
                            vsg_dataset** out) {
  return guard([&] {
    require(manifest_path != nullptr && out != nullptr, "manifest path required");
    auto ds = std::make_unique<vsg_dataset>();
    ds->manifest_path = manifest_path;
    ds->manifest = load_manifest(ds->manifest_path);
    ds->train = load_split(ds->manifest_path, ds->manifest, "train", with_features != 0);
    ds->val = load_split(ds->manifest_path, ds->manifest, "val", with_features != 0);
    *out = ds.release();
  });
}

void vsg_dataset_free(vsg_dataset* ds) { delete ds; }

int vsg_dataset_size(const vsg_dataset* ds, const char* split) {
  if (ds == nullptr || split == nullptr) return -1;
  const std::string s(split);
  if (s == "train") return static_cast<int>(ds->train.size());
  if (s == "val") return static_cast<int>(ds->val.size());
  return -1;
}

vsg_status vsg_dataset_stats(const vsg_dataset* ds, const char* split, int bins,
                             char** json_out) {
  return guard([&] {
    require(json_out != nullptr, "output pointer required");
    require(bins >= 1, "bins must be >= 1");
    const auto& scenes = split_of(ds, split);
    std::vector<TemporalBipartiteGraph> graphs;
    graphs.reserve(scenes.size());
    for (const auto& s : scenes) graphs.push_back(to_graph(s));
    *json_out = dup_string(multi_instance_stats(graphs, bins).to_json().dump(2));
  });
}

vsg_status vsg_classifier_create(const char* config_json, vsg_classifier** out) {
  return guard([&] {
    require(out != nullptr, "output pointer required");
    const ClassifierConfig cfg =
        classifier_config_from_json(parse_options(config_json, "classifier config"));
    auto c = std::make_unique<vsg_classifier>();
    c->model = std::make_unique<Classifier>(cfg);
    *out = c.release();
  });
}

vsg_status vsg_classifier_load(const char* path, vsg_classifier** out) {
  return guard([&] {
    require(out != nullptr, "output pointer required");
    const ClassifierConfig cfg =
        classifier_config_from_json(read_checkpoint_model(path, kClassifierKind));
    auto c = std::make_unique<vsg_classifier>();
    c->model = std::make_unique<Classifier>(cfg);
    load_checkpoint(path, c->model->params());
    *out = c.release();
  });
}

vsg_status vsg_classifier_save(const vsg_classifier* c, const char* path) {
  return guard([&] {
    require(c != nullptr && path != nullptr, "classifier and path required");
    save_checkpoint(path, c->model->params(),
                    checkpoint_config(kClassifierKind,
                                      classifier_config_to_json(c->model->config())));
  });
}

vsg_status vsg_classifier_config(const vsg_classifier* c, char** json_out) {
  return guard([&] {
    require(c != nullptr && json_out != nullptr, "classifier required");
    *json_out = dup_string(classifier_config_to_json(c->model->config()).dump(2));
  });
}

void vsg_classifier_free(vsg_classifier* c) { delete c; }

vsg_status vsg_classifier_train(vsg_classifier* c, const vsg_dataset* ds,
                                const char* options_json, vsg_epoch_fn on_epoch,
                                void* user) {
  return guard([&] {
    require(c != nullptr && ds != nullptr, "classifier and dataset required");
    const ClassifierConfig& cfg = c->model->config();
    check_vocabulary(ds, cfg.entity_categories, cfg.predicate_categories,
                     "classifier");
    if (ds->manifest.appearance_dim != cfg.features.appearance_dim) {
      throw InvalidInput("classifier expects appearance_dim " +
                         std::to_string(cfg.features.appearance_dim) +
                         "; dataset has " +
                         std::to_string(ds->manifest.appearance_dim));
    }
    TrainOptions opts = train_options_from_json(
        parse_options(options_json, "train options"), desk_classifier_schedule());
    opts.on_epoch = epoch_hook(on_epoch, user);
    std::vector<TemporalBipartiteGraph> graphs;
    for (const auto& s : ds->train) graphs.push_back(to_graph(s));
    c->model->set_prior(
        build_prior(graphs, cfg.entity_categories, cfg.predicate_categories));
    train_classifier(*c->model, ds->train, opts);
  });
}

vsg_status vsg_grounding_create(const char* config_json, vsg_grounding** out) {
  return guard([&] {
    require(out != nullptr, "output pointer required");
    const GroundingConfig cfg =
        grounding_config_from_json(parse_options(config_json, "grounding config"));
    auto g = std::make_unique<vsg_grounding>();
    g->model = std::make_unique<GroundingModel>(cfg);
    *out = g.release();
  });
}

vsg_status vsg_grounding_load(const char* path, vsg_grounding** out) {
  return guard([&] {
    require(out != nullptr, "output pointer required");
    const GroundingConfig cfg =
        grounding_config_from_json(read_checkpoint_model(path, kGroundingKind));
    auto g = std::make_unique<vsg_grounding>();
    g->model = std::make_unique<GroundingModel>(cfg);
    load_checkpoint(path, g->model->params());
    *out = g.release();
  });
}

vsg_status vsg_grounding_save(const vsg_grounding* g, const char* path) {
  return guard([&] {
    require(g != nullptr && path != nullptr, "grounding model and path required");
    save_checkpoint(path, g->model->params(),
                    checkpoint_config(kGroundingKind,
                                      grounding_config_to_json(g->model->config())));
  });
}

vsg_status vsg_grounding_config(const vsg_grounding* g, char** json_out) {
  return guard([&] {
    require(g != nullptr && json_out != nullptr, "grounding model required");
    *json_out = dup_string(grounding_config_to_json(g->model->config()).dump(2));
  });
}

void vsg_grounding_free(vsg_grounding* g) { delete g; }

vsg_status vsg_grounding_train(vsg_grounding* g, const vsg_dataset* ds,
                               const char* options_json, vsg_epoch_fn on_epoch,
                               void* user) {
  return guard([&] {
    require(g != nullptr && ds != nullptr, "grounding model and dataset required");
    const GroundingConfig& cfg = g->model->config();
    check_vocabulary(ds, cfg.entity_categories, cfg.predicate_categories,
                     "grounding model");
    if (ds->manifest.frame_dim != cfg.frame_dim) {
      throw InvalidInput("grounding model expects frame_dim " +
                         std::to_string(cfg.frame_dim) + "; dataset has " +
                         std::to_string(ds->manifest.frame_dim));
    }
    TrainOptions opts = train_options_from_json(
        parse_options(options_json, "train options"), desk_grounding_schedule());
    opts.on_epoch = epoch_hook(on_epoch, user);
    train_grounding(*g->model, ds->train, opts);
  });
}

vsg_status vsg_infer(const vsg_classifier* c, const vsg_grounding* g,
                     const vsg_dataset* ds, const char* split,
                     const char* options_json, vsg_predictions** out) {
  return guard([&] {
    require(c != nullptr && out != nullptr, "classifier required");
    const auto& scenes = split_of(ds, split);
    const Json j = parse_options(options_json, "inference options");
    const std::string mode = j.value("mode", "big");
    InferMode m;
    if (mode == "big") {
      m = InferMode::kGrounded;
      require(g != nullptr, "mode big needs a grounding model");
    } else if (mode == "vidvrd") {
      m = InferMode::kOverlapOnly;
    } else {
      throw InvalidInput("unknown mode '" + mode + "' (expected big or vidvrd)");
    }
    InferenceOptions opts;
    opts.k_keep = j.value("k_keep", opts.k_keep);
    opts.score_floor = j.value("score_floor", opts.score_floor);
    opts.nms_threshold = j.value("nms_threshold", opts.nms_threshold);
    const int threads = j.value("threads", 1);
    require(opts.k_keep >= 1, "k_keep must be >= 1");
    require(threads >= 1, "threads must be >= 1");
    const ClassifierConfig& cc = c->model->config();
    check_vocabulary(ds, cc.entity_categories, cc.predicate_categories, "classifier");
    if (g != nullptr && m == InferMode::kGrounded) {
      const GroundingConfig& gc = g->model->config();
      check_vocabulary(ds, gc.entity_categories, gc.predicate_categories,
                       "grounding model");
    }
    auto p = std::make_unique<vsg_predictions>();
    p->preds = infer_scenes(*c->model, m == InferMode::kGrounded ? g->model.get() : nullptr,
                            scenes, m, opts, threads);
    *out = p.release();
  });
}

vsg_status vsg_predictions_save(const vsg_predictions* p, const vsg_dataset* ds,
                                const char* path) {
  return guard([&] {
    require(p != nullptr && ds != nullptr && path != nullptr,
            "predictions, dataset and path required");
    save_predictions(path, p->preds, ds->manifest.vocabulary);
  });
}

vsg_status vsg_predictions_load(const char* path, const vsg_dataset* ds,
                                vsg_predictions** out) {
  return guard([&] {
    require(path != nullptr && ds != nullptr && out != nullptr,
            "path and dataset required");
    auto p = std::make_unique<vsg_predictions>();
    p->preds = load_predictions(path, ds->manifest.vocabulary);
    *out = p.release();
  });
}

int vsg_predictions_count(const vsg_predictions* p) {
  if (p == nullptr) return -1;
  std::size_t n = 0;
  for (const auto& [id, v] : p->preds) n += v.size();
  return static_cast<int>(n);
}

void vsg_predictions_free(vsg_predictions* p) { delete p; }

vsg_status vsg_evaluate(const vsg_dataset* ds, const char* split,
                        const vsg_predictions* p, int threads, vsg_report** out) {
  return guard([&] {
    require(p != nullptr && out != nullptr, "predictions required");
    require(threads >= 1, "threads must be >= 1");
    const auto& scenes = split_of(ds, split);
    for (const auto& [id, v] : p->preds) {
      bool known = false;
      for (const auto& s : scenes) known = known || s.video_id == id;
      if (!known) throw DataError("predictions reference unknown video '" + id + "'");
    }
    const auto videos = make_eval_set(scenes, p->preds);
    auto r = std::make_unique<vsg_report>();
    r->report = evaluate(videos, kDefaultViouThreshold, threads);
    *out = r.release();
  });
}

vsg_status vsg_report_metric(const vsg_report* r, const char* key, double* value) {
  return guard([&] {
    require(r != nullptr && key != nullptr && value != nullptr,
            "report, key and output required");
    const EvalReport& e = r->report;
    const std::string k(key);
    if (k == "mAP") { *value = e.reldet.mean_ap; return; }
    if (k == "R@50") { *value = e.reldet.recall_50; return; }
    if (k == "R@100") { *value = e.reldet.recall_100; return; }
    if (k == "P@1") { *value = e.reltag.precision_1; return; }
    if (k == "P@5") { *value = e.reltag.precision_5; return; }
    if (k == "P@10") { *value = e.reltag.precision_10; return; }
    for (std::size_t i = 0; i < e.fraction.ks.size(); ++i) {
      const std::string at = "@" + std::to_string(e.fraction.ks[i]);
      if (k == "fR_S" + at) { *value = e.fraction.single[i]; return; }
      if (k == "fR_M" + at) { *value = e.fraction.multi[i]; return; }
    }
    throw InvalidInput("unknown metric '" + k + "'");
  });
}

vsg_status vsg_report_json(const vsg_report* r, char** json_out) {
  return guard([&] {
    require(r != nullptr && json_out != nullptr, "report required");
    *json_out = dup_string(r->report.to_json());
  });
}

vsg_status vsg_report_table(const vsg_report* r, char** text_out) {
  return guard([&] {
    require(r != nullptr && text_out != nullptr, "report required");
    *text_out = dup_string(r->report.to_table());
  });
}

vsg_status vsg_report_per_video_csv(const vsg_report* r, char** csv_out) {
  return guard([&] {
    require(r != nullptr && csv_out != nullptr, "report required");
    *csv_out = dup_string(r->report.per_video_csv());
  });
}

void vsg_report_free(vsg_report* r) { delete r; }

}  // extern "C"
