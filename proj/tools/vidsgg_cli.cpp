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

// vidsgg command-line tool: synth, train-cls, train-grd, infer, eval, stats.
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vidsgg/vidsgg.h"

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code(vsg_status s) {
  switch (s) {
    case VSG_OK: return kExitOk;
    case VSG_ERR_USAGE: return kExitUsage;
    case VSG_ERR_DATA: return kExitData;
    case VSG_ERR_NUMERIC: return kExitNumeric;
    default: return kExitData;
  }
}

struct Failure {
  int code;
};

void check(vsg_status s, const std::string& what) {
  if (s == VSG_OK) return;
  std::cerr << "vidsgg: " << what << ": " << vsg_last_error() << "\n";
  throw Failure{exit_code(s)};
}

[[noreturn]] void fail(int code, const std::string& msg) {
  std::cerr << "vidsgg: " << msg << "\n";
  throw Failure{code};
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

// Accepts a manifest file or a dataset directory holding manifest.json.
std::string manifest_path(const std::string& data) {
  fs::path p(data);
  if (fs::is_directory(p)) p /= "manifest.json";
  return p.string();
}

std::string take(char* s) {
  std::string out = s != nullptr ? s : "";
  vsg_string_free(s);
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) fail(kExitData, "cannot write " + path.string());
}

struct Dataset {
  vsg_dataset* ds = nullptr;
  Dataset(const std::string& data, bool features) {
    check(vsg_dataset_open(manifest_path(data).c_str(), features ? 1 : 0, &ds),
          "loading dataset " + data);
  }
  ~Dataset() { vsg_dataset_free(ds); }
  Dataset(const Dataset&) = delete;
  Dataset& operator=(const Dataset&) = delete;
};

struct Classifier {
  vsg_classifier* c = nullptr;
  ~Classifier() { vsg_classifier_free(c); }
};

struct Grounding {
  vsg_grounding* g = nullptr;
  ~Grounding() { vsg_grounding_free(g); }
};

Json read_manifest(const std::string& data) {
  std::ifstream in(manifest_path(data));
  if (!in) fail(kExitData, "cannot read " + manifest_path(data));
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(kExitData, manifest_path(data) + ": " + e.what());
  }
}

// ---- training --------------------------------------------------------------

struct TrainFlags {
  std::string data;
  std::string out;
  std::string log;
  std::string preset = "desk";
  std::optional<int> epochs, batch_size;
  std::optional<double> lr, lr_factor, grad_clip, lambda_att;
  std::vector<int> milestones;
  std::uint64_t seed = 0;
  int threads = 1;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--data", f.data, "Dataset directory or manifest [env VIDSGG_DATA]");
  cmd->add_option("--out", f.out, "Checkpoint path, rewritten after every epoch");
  cmd->add_option("--log", f.log, "Per-epoch loss CSV (default: <out>.loss.csv)");
  cmd->add_option("--preset", f.preset,
                  "full: full model sizes and reference schedule; desk: small "
                  "sizes and a short schedule")
      ->check(CLI::IsMember({"full", "desk"}))
      ->capture_default_str();
  cmd->add_option("--epochs", f.epochs, "Epochs (full preset: 60 cls / 70 grd)");
  cmd->add_option("--batch-size", f.batch_size, "Videos per step (full preset: 4 cls / 8 grd)");
  cmd->add_option("--lr", f.lr, "Base learning rate (full preset: 5e-5)");
  cmd->add_option("--milestones", f.milestones,
                  "Epochs where the rate is multiplied by --lr-factor "
                  "(full preset: 50 cls / 40 60 grd)");
  cmd->add_option("--lr-factor", f.lr_factor, "Decay factor (full preset: 0.2)");
  cmd->add_option("--grad-clip", f.grad_clip, "Global gradient norm clip, 0 = off");
  cmd->add_option("--seed", f.seed, "Initialisation and shuffling seed")->capture_default_str();
  cmd->add_option("--threads", f.threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

Json train_options(const TrainFlags& f, bool grounding) {
  Json o;
  if (f.preset == "full") {
    o = grounding ? Json{{"epochs", 70}, {"batch_size", 8}, {"lr", 5e-5},
                         {"milestones", {40, 60}}, {"lr_factor", 0.2}, {"grad_clip", 0.0}}
                  : Json{{"epochs", 60}, {"batch_size", 4}, {"lr", 5e-5},
                         {"milestones", {50}}, {"lr_factor", 0.2}, {"grad_clip", 0.0}};
  } else {
    o = Json::object();  // library desk schedule
  }
  if (f.epochs) o["epochs"] = *f.epochs;
  if (f.batch_size) o["batch_size"] = *f.batch_size;
  if (f.lr) o["lr"] = *f.lr;
  if (!f.milestones.empty()) o["milestones"] = f.milestones;
  if (f.lr_factor) o["lr_factor"] = *f.lr_factor;
  if (f.grad_clip) o["grad_clip"] = *f.grad_clip;
  if (f.lambda_att) o["lambda_att"] = *f.lambda_att;
  o["seed"] = f.seed;
  o["threads"] = f.threads;
  return o;
}

struct EpochSink {
  std::ofstream csv;
  std::function<vsg_status(const char*)> save;
  std::string out;
  std::string error;
};

int on_epoch(void* user, int epoch, double loss, double lr) {
  auto* sink = static_cast<EpochSink*>(user);
  sink->csv << epoch << "," << loss << "," << lr << "\n";
  sink->csv.flush();
  std::fprintf(stderr, "epoch %d loss %.6f lr %.3g\n", epoch, loss, lr);
  if (sink->save(sink->out.c_str()) != VSG_OK) {
    sink->error = vsg_last_error();
    return 1;
  }
  return 0;
}

void open_log(EpochSink& sink, const TrainFlags& f) {
  const fs::path log = f.log.empty() ? fs::path(f.out + ".loss.csv") : fs::path(f.log);
  if (log.has_parent_path()) fs::create_directories(log.parent_path());
  sink.csv.open(log);
  if (!sink.csv) fail(kExitData, "cannot write " + log.string());
  sink.csv.precision(10);
  sink.csv << "epoch,loss,lr\n";
}

void finish_training(vsg_status s, const EpochSink& sink, const char* what) {
  if (s != VSG_OK && !sink.error.empty()) {
    fail(kExitData, std::string(what) + ": writing checkpoint: " + sink.error);
  }
  check(s, what);
}

struct ClsFlags {
  TrainFlags t;
  std::optional<int> queries, model_dim, heads, encoder_layers, decoder_layers,
      hidden, word_dim;
};

int cmd_train_cls(ClsFlags& f) {
  const Json manifest = read_manifest(f.t.data);
  Json cfg = Json::object();
  if (f.t.preset == "desk") {
    cfg = {{"queries", 16}, {"model_dim", 64}, {"query_dim", 64}, {"heads", 4},
           {"encoder_layers", 1}, {"decoder_layers", 2}, {"mlp_hidden", 64},
           {"word_dim", 32}, {"feature_hidden", 64}};
  }
  cfg["entity_categories"] = manifest.at("vocabulary").at("entities").size();
  cfg["predicate_categories"] = manifest.at("vocabulary").at("predicates").size();
  cfg["appearance_dim"] = manifest.at("appearance_dim");
  cfg["seed"] = f.t.seed;
  if (f.queries) cfg["queries"] = *f.queries;
  if (f.model_dim) cfg["model_dim"] = cfg["query_dim"] = *f.model_dim;
  if (f.heads) cfg["heads"] = *f.heads;
  if (f.encoder_layers) cfg["encoder_layers"] = *f.encoder_layers;
  if (f.decoder_layers) cfg["decoder_layers"] = *f.decoder_layers;
  if (f.hidden) cfg["mlp_hidden"] = cfg["feature_hidden"] = *f.hidden;
  if (f.word_dim) cfg["word_dim"] = *f.word_dim;

  Dataset ds(f.t.data, true);
  Classifier model;
  check(vsg_classifier_create(cfg.dump().c_str(), &model.c), "classifier config");
  EpochSink sink;
  sink.out = f.t.out;
  sink.save = [&](const char* p) { return vsg_classifier_save(model.c, p); };
  open_log(sink, f.t);
  const std::string opts = train_options(f.t, false).dump();
  finish_training(vsg_classifier_train(model.c, ds.ds, opts.c_str(), on_epoch, &sink),
                  sink, "train-cls");
  check(vsg_classifier_save(model.c, f.t.out.c_str()), "saving checkpoint");
  std::cout << "wrote " << f.t.out << "\n";
  return kExitOk;
}

struct GrdFlags {
  TrainFlags t;
  std::optional<int> bins, model_dim, heads, hidden, word_dim;
  std::vector<int> dilations;
  bool no_positions = false;
};

int cmd_train_grd(GrdFlags& f) {
  const Json manifest = read_manifest(f.t.data);
  Json cfg = Json::object();
  if (f.t.preset == "desk") {
    cfg = {{"word_dim", 32}, {"model_dim", 64}, {"heads", 4}, {"mlp_hidden", 64},
           {"dilations", {1, 2, 4, 8, 16}}};
  }
  cfg["entity_categories"] = manifest.at("vocabulary").at("entities").size();
  cfg["predicate_categories"] = manifest.at("vocabulary").at("predicates").size();
  cfg["frame_dim"] = manifest.at("frame_dim");
  cfg["seed"] = f.t.seed;
  if (f.bins) cfg["bins"] = *f.bins;
  if (f.model_dim) cfg["model_dim"] = *f.model_dim;
  if (f.heads) cfg["heads"] = *f.heads;
  if (f.hidden) cfg["mlp_hidden"] = *f.hidden;
  if (f.word_dim) cfg["word_dim"] = *f.word_dim;
  if (!f.dilations.empty()) cfg["dilations"] = f.dilations;
  if (f.no_positions) cfg["frame_positions"] = false;

  Dataset ds(f.t.data, true);
  Grounding model;
  check(vsg_grounding_create(cfg.dump().c_str(), &model.g), "grounding config");
  EpochSink sink;
  sink.out = f.t.out;
  sink.save = [&](const char* p) { return vsg_grounding_save(model.g, p); };
  open_log(sink, f.t);
  const std::string opts = train_options(f.t, true).dump();
  finish_training(vsg_grounding_train(model.g, ds.ds, opts.c_str(), on_epoch, &sink),
                  sink, "train-grd");
  check(vsg_grounding_save(model.g, f.t.out.c_str()), "saving checkpoint");
  std::cout << "wrote " << f.t.out << "\n";
  return kExitOk;
}

// ---- synth / infer / eval / stats ------------------------------------------

struct SynthFlags {
  std::string out;
  int scenes = 200;
  int val = 0;
  std::uint64_t seed = 0;
  std::optional<double> multi_instance_prob, noise;
  std::optional<int> frames, min_entities, max_entities, min_relations,
      max_relations, appearance_dim, frame_dim;
};

int cmd_synth(const SynthFlags& f) {
  Json cfg{{"seed", f.seed}};
  if (f.multi_instance_prob) cfg["multi_instance_prob"] = *f.multi_instance_prob;
  if (f.noise) cfg["noise"] = *f.noise;
  if (f.frames) cfg["frames"] = *f.frames;
  if (f.min_entities) cfg["min_entities"] = *f.min_entities;
  if (f.max_entities) cfg["max_entities"] = *f.max_entities;
  if (f.min_relations) cfg["min_relations"] = *f.min_relations;
  if (f.max_relations) cfg["max_relations"] = *f.max_relations;
  if (f.appearance_dim) cfg["appearance_dim"] = *f.appearance_dim;
  if (f.frame_dim) cfg["frame_dim"] = *f.frame_dim;
  check(vsg_synth(f.out.c_str(), cfg.dump().c_str(), f.scenes, f.val), "synth");
  std::cout << "wrote " << f.scenes + f.val << " scenes to " << f.out << "\n";
  return kExitOk;
}

struct InferFlags {
  std::string data, cls, grd, out, split = "val", mode = "big";
  std::optional<int> bins;
  int k_keep = 10;
  double score_floor = 0.2;
  double nms = 0.8;
  int threads = 1;
};

int cmd_infer(const InferFlags& f) {
  Classifier cls;
  check(vsg_classifier_load(f.cls.c_str(), &cls.c), "loading " + f.cls);
  Grounding grd;
  if (f.mode == "big") {
    check(vsg_grounding_load(f.grd.c_str(), &grd.g), "loading " + f.grd);
    if (f.bins) {
      const Json cfg = Json::parse(take([&] {
        char* s = nullptr;
        check(vsg_grounding_config(grd.g, &s), "grounding config");
        return s;
      }()));
      if (cfg.at("bins").get<int>() != *f.bins) {
        fail(kExitUsage, "--bins " + std::to_string(*f.bins) + " but " + f.grd +
                             " was trained with " + cfg.at("bins").dump());
      }
    }
  }
  Dataset ds(f.data, true);
  const Json opts{{"mode", f.mode}, {"k_keep", f.k_keep}, {"score_floor", f.score_floor},
                  {"nms_threshold", f.nms}, {"threads", f.threads}};
  vsg_predictions* preds = nullptr;
  check(vsg_infer(cls.c, grd.g, ds.ds, f.split.c_str(), opts.dump().c_str(), &preds),
        "infer");
  const vsg_status s = vsg_predictions_save(preds, ds.ds, f.out.c_str());
  const int n = vsg_predictions_count(preds);
  vsg_predictions_free(preds);
  check(s, "writing " + f.out);
  std::cout << "wrote " << n << " triplets to " << f.out << "\n";
  return kExitOk;
}

struct EvalFlags {
  std::string data, pred, out, split = "val";
  int threads = 1;
};

int cmd_eval(const EvalFlags& f) {
  Dataset ds(f.data, false);
  vsg_predictions* preds = nullptr;
  check(vsg_predictions_load(f.pred.c_str(), ds.ds, &preds), "loading " + f.pred);
  vsg_report* report = nullptr;
  const vsg_status s = vsg_evaluate(ds.ds, f.split.c_str(), preds, f.threads, &report);
  vsg_predictions_free(preds);
  check(s, "eval");
  char *json = nullptr, *table = nullptr, *csv = nullptr;
  vsg_status st = vsg_report_json(report, &json);
  if (st == VSG_OK) st = vsg_report_table(report, &table);
  if (st == VSG_OK) st = vsg_report_per_video_csv(report, &csv);
  vsg_report_free(report);
  const std::string j = take(json), t = take(table), c = take(csv);
  check(st, "eval report");
  const fs::path dir(f.out);
  write_file(dir / "report.json", j + "\n");
  write_file(dir / "report.txt", t);
  write_file(dir / "per_video.csv", c);
  std::cout << t;
  return kExitOk;
}

struct StatsFlags {
  std::string data, out, split = "train";
  int bins = 10;
};

int cmd_stats(const StatsFlags& f) {
  Dataset ds(f.data, false);
  char* json = nullptr;
  check(vsg_dataset_stats(ds.ds, f.split.c_str(), f.bins, &json), "stats");
  const std::string j = take(json);
  if (!f.out.empty()) write_file(f.out, j + "\n");
  std::cout << j << "\n";
  return kExitOk;
}

void require_path(std::string& value, const char* flag, const char* env,
                  const std::string& fallback = "") {
  if (!value.empty()) return;
  value = env != nullptr ? env_or(env, fallback) : fallback;
  if (value.empty()) {
    fail(kExitUsage, std::string(flag) + " is required" +
                         (env != nullptr ? std::string(" (or set ") + env + ")" : ""));
  }
}

std::string checkpoint_default(const char* file) {
  const std::string dir = env_or("VIDSGG_CHECKPOINTS", "");
  return dir.empty() ? "" : (fs::path(dir) / file).string();
}

std::string output_default(const char* file) {
  const std::string dir = env_or("VIDSGG_OUTPUT", "");
  return dir.empty() ? "" : (fs::path(dir) / file).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video scene graph generation: synthetic data, two-stage "
               "training, inference and evaluation.\n"
               "Path flags fall back to VIDSGG_DATA, VIDSGG_CHECKPOINTS and "
               "VIDSGG_OUTPUT."};
  app.require_subcommand(1);

  SynthFlags synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset and manifest");
  c_synth->add_option("--out", synth.out, "Output directory [env VIDSGG_DATA]");
  c_synth->add_option("--scenes", synth.scenes, "Training scenes")->capture_default_str();
  c_synth->add_option("--val", synth.val, "Held-out scenes")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Corpus seed")->capture_default_str();
  c_synth->add_option("--multi-instance-prob", synth.multi_instance_prob,
                      "Chance a relation gets 2-3 disjoint slots (default 0.35)")
      ->check(CLI::Range(0.0, 1.0));
  c_synth->add_option("--noise", synth.noise, "Feature noise sigma (default 0.1)");
  c_synth->add_option("--frames", synth.frames, "Frames per video (default 64)");
  c_synth->add_option("--min-entities", synth.min_entities, "(default 3)");
  c_synth->add_option("--max-entities", synth.max_entities, "(default 6)");
  c_synth->add_option("--min-relations", synth.min_relations, "(default 2)");
  c_synth->add_option("--max-relations", synth.max_relations, "(default 6)");
  c_synth->add_option("--appearance-dim", synth.appearance_dim, "d_a (default 64)");
  c_synth->add_option("--frame-dim", synth.frame_dim, "d_v (default 64)");

  ClsFlags cls;
  auto* c_cls = app.add_subcommand("train-cls", "Train the classification stage");
  add_train_flags(c_cls, cls.t);
  c_cls->add_option("--lambda-att", cls.t.lambda_att, "Attention loss weight (default 30)");
  c_cls->add_option("--queries", cls.queries, "Predicate queries m (full preset: 192)");
  c_cls->add_option("--model-dim", cls.model_dim, "d_e = d_q (full preset: 512)");
  c_cls->add_option("--heads", cls.heads, "Attention heads (full preset: 8)");
  c_cls->add_option("--encoder-layers", cls.encoder_layers, "(full preset: 3)");
  c_cls->add_option("--decoder-layers", cls.decoder_layers, "(full preset: 3)");
  c_cls->add_option("--hidden", cls.hidden, "Perceptron width (full preset: 512)");
  c_cls->add_option("--word-dim", cls.word_dim, "Category embedding width (full preset: 300)");

  GrdFlags grd;
  auto* c_grd = app.add_subcommand("train-grd", "Train the grounding stage");
  add_train_flags(c_grd, grd.t);
  c_grd->add_option("--bins", grd.bins, "Grounding bins K (default 10)")
      ->check(CLI::PositiveNumber);
  c_grd->add_option("--model-dim", grd.model_dim, "d (full preset: 256)");
  c_grd->add_option("--heads", grd.heads, "Attention heads (full preset: 4)");
  c_grd->add_option("--hidden", grd.hidden, "Perceptron width (full preset: 512)");
  c_grd->add_option("--word-dim", grd.word_dim, "Category embedding width (full preset: 300)");
  c_grd->add_option("--dilations", grd.dilations, "Trunk dilations (full preset: 1 2 4 8)");
  c_grd->add_flag("--no-frame-positions", grd.no_positions, "Disable sinusoidal frame positions");

  InferFlags inf;
  auto* c_inf = app.add_subcommand("infer", "Classify and ground relations, write predictions");
  c_inf->add_option("--data", inf.data, "Dataset directory or manifest [env VIDSGG_DATA]");
  c_inf->add_option("--cls", inf.cls, "Classifier checkpoint [env VIDSGG_CHECKPOINTS/cls.ckpt]");
  c_inf->add_option("--grd", inf.grd, "Grounding checkpoint [env VIDSGG_CHECKPOINTS/grd.ckpt]");
  c_inf->add_option("--out", inf.out, "Predictions JSON [env VIDSGG_OUTPUT/predictions.json]");
  c_inf->add_option("--split", inf.split, "train or val")
      ->check(CLI::IsMember({"train", "val"}))
      ->capture_default_str();
  c_inf->add_option("--mode", inf.mode,
                    "big: grounded multi-slot output; vidvrd: one overlap slot per relation")
      ->check(CLI::IsMember({"big", "vidvrd"}))
      ->capture_default_str();
  c_inf->add_option("--bins", inf.bins, "Expected K of the grounding checkpoint");
  c_inf->add_option("--k-keep", inf.k_keep,
                    "Predicate categories kept per query (10 VidVRD-style, 3 VidOR-style)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_inf->add_option("--score-floor", inf.score_floor,
                    "Drop a query when its best grounded slot scores below this")
      ->capture_default_str();
  c_inf->add_option("--nms", inf.nms, "Temporal NMS tIoU threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  c_inf->add_option("--threads", inf.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  EvalFlags ev;
  auto* c_eval = app.add_subcommand("eval", "Score predictions against ground truth");
  c_eval->add_option("--data", ev.data, "Dataset directory or manifest [env VIDSGG_DATA]");
  c_eval->add_option("--pred", ev.pred, "Predictions JSON [env VIDSGG_OUTPUT/predictions.json]");
  c_eval->add_option("--out", ev.out, "Report directory [env VIDSGG_OUTPUT]");
  c_eval->add_option("--split", ev.split, "train or val")
      ->check(CLI::IsMember({"train", "val"}))
      ->capture_default_str();
  c_eval->add_option("--threads", ev.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  StatsFlags st;
  auto* c_stats = app.add_subcommand("stats", "Instance-count and bin-collision statistics");
  c_stats->add_option("--data", st.data, "Dataset directory or manifest [env VIDSGG_DATA]");
  c_stats->add_option("--split", st.split, "train or val")
      ->check(CLI::IsMember({"train", "val"}))
      ->capture_default_str();
  c_stats->add_option("--bins", st.bins, "Bins K")->check(CLI::PositiveNumber)->capture_default_str();
  c_stats->add_option("--out", st.out, "Also write the JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c_synth) {
      require_path(synth.out, "--out", "VIDSGG_DATA");
      return cmd_synth(synth);
    }
    if (*c_cls) {
      require_path(cls.t.data, "--data", "VIDSGG_DATA");
      require_path(cls.t.out, "--out", nullptr, checkpoint_default("cls.ckpt"));
      return cmd_train_cls(cls);
    }
    if (*c_grd) {
      require_path(grd.t.data, "--data", "VIDSGG_DATA");
      require_path(grd.t.out, "--out", nullptr, checkpoint_default("grd.ckpt"));
      return cmd_train_grd(grd);
    }
    if (*c_inf) {
      require_path(inf.data, "--data", "VIDSGG_DATA");
      require_path(inf.cls, "--cls", nullptr, checkpoint_default("cls.ckpt"));
      if (inf.mode == "big") {
        require_path(inf.grd, "--grd", nullptr, checkpoint_default("grd.ckpt"));
      }
      require_path(inf.out, "--out", nullptr, output_default("predictions.json"));
      return cmd_infer(inf);
    }
    if (*c_eval) {
      require_path(ev.data, "--data", "VIDSGG_DATA");
      require_path(ev.pred, "--pred", nullptr, output_default("predictions.json"));
      require_path(ev.out, "--out", "VIDSGG_OUTPUT");
      return cmd_eval(ev);
    }
    if (*c_stats) {
      require_path(st.data, "--data", "VIDSGG_DATA");
      return cmd_stats(st);
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const Json::exception& e) {
    std::cerr << "vidsgg: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "vidsgg: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
