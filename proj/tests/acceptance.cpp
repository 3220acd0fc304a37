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

// Acceptance checks A1-A9. Prints one PASS/FAIL line per criterion; with
// arguments, runs only the named criteria (e.g. `vidsgg_acceptance A3 A5`).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "eval_oracle.hpp"
#include "test_util.hpp"
#include "vidsgg/classifier.hpp"
#include "vidsgg/config_json.hpp"
#include "vidsgg/data_io.hpp"
#include "vidsgg/evaluation.hpp"
#include "vidsgg/grounding.hpp"
#include "vidsgg/matching.hpp"
#include "vidsgg/pipeline.hpp"
#include "vidsgg/train.hpp"

#ifndef VIDSGG_CLI_PATH
#define VIDSGG_CLI_PATH "vidsgg"
#endif

namespace vidsgg {
namespace {

namespace fs = std::filesystem;
using testing::constant_tracklet;
using testing::random_matrix;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- A1 ----------------------------------------------------------------------------

Outcome a1_gradients() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();

  ClassifierConfig cc;
  cc.entity_categories = 3;
  cc.predicate_categories = 4;
  cc.queries = 4;
  cc.model_dim = 8;
  cc.query_dim = 8;
  cc.heads = 2;
  cc.encoder_layers = 1;
  cc.decoder_layers = 1;
  cc.mlp_hidden = 8;
  cc.word_dim = 4;
  cc.features.appearance_dim = 5;
  cc.features.model_dim = 8;
  cc.features.hidden = 8;
  cc.seed = 21;
  Classifier cls(cc);
  std::mt19937_64 rng(22);
  std::vector<Tracklet> entities;
  std::vector<Matrix> appearance;
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int i = 0; i < 3; ++i) {
    const double x = u(rng), y = u(rng);
    entities.push_back(constant_tracklet(i, i, i, 7 + i, {x, y, x + 0.3, y + 0.3}));
    appearance.push_back(random_matrix(rng, entities.back().length(), 5));
  }
  TemporalBipartiteGraph g;
  g.frame_count = 12;
  g.entities = entities;
  g.predicates = {{1, {{0.25, 0.5}}, {1.0}, 0, 2}, {3, {{0.2, 0.4}}, {1.0}, 1, 0}};
  const GtAssignment targets = build_gt_assignment(g, entities, cc.queries);
  std::optional<std::vector<std::pair<int, int>>> edges;
  std::optional<std::vector<int>> match;
  auto cls_loss = [&](ad::Tape& tape) {
    const auto f = cls.forward(tape, entities, appearance, edges);
    if (!edges) edges = f.edges;
    const auto l = stage_loss(f.probs, f.subject_attn, f.object_attn, targets, 30.0, match);
    if (!match) match = l.match.prediction_of_gt;
    return l.loss;
  };
  auto cls_value = [&] {
    ad::Tape tape;
    return cls_loss(tape).scalar();
  };
  auto cls_analytic = [&] {
    ad::Tape tape;
    tape.backward(cls_loss(tape));
  };
  cls_value();  // fixes the matching and edges at the evaluation point
  // Tensors with an identically zero gradient (attention key biases) only
  // carry finite-difference round-off, so the denominator floor scales with
  // the whole gradient.
  const double cls_floor = 1e-6 * testing::gradient_norm(cls.params(), cls_analytic);
  const auto ce = testing::gradient_errors(cls.params(), cls_value, cls_analytic, 1e-5,
                                           cls_floor);

  GroundingConfig gc;
  gc.entity_categories = 3;
  gc.predicate_categories = 4;
  gc.word_dim = 4;
  gc.frame_dim = 5;
  gc.model_dim = 8;
  gc.heads = 2;
  gc.mlp_hidden = 8;
  gc.bins = 3;
  gc.dilations = {1, 2};
  gc.seed = 23;
  GroundingModel grd(gc);
  const Matrix frames = random_matrix(rng, 12, 5);
  const GroundingQuery q{0, 1, 2, {0.1, 0.9}};
  const std::vector<std::optional<TimeSlot>> slots = {TimeSlot{0.1, 0.3}, std::nullopt,
                                                      TimeSlot{0.7, 0.9}};
  // The confidence target carries no gradient, so it is held at its value at
  // the evaluation point.
  Matrix conf_target;
  {
    ad::Tape tape;
    conf_target = confidence_targets(
        grd.forward(tape, grd.encode_frames(tape, frames), q).reg.value(), slots);
  }
  auto grd_loss = [&](ad::Tape& tape) {
    return grounding_loss(grd.forward(tape, grd.encode_frames(tape, frames), q), slots,
                          conf_target);
  };
  auto grd_analytic = [&] {
    ad::Tape tape;
    tape.backward(grd_loss(tape));
  };
  const double grd_floor = 1e-6 * testing::gradient_norm(grd.params(), grd_analytic);
  const auto ge = testing::gradient_errors(
      grd.params(),
      [&] {
        ad::Tape tape;
        return grd_loss(tape).scalar();
      },
      grd_analytic, 1e-5, grd_floor);

  const double secs = seconds_since(t0);
  out.require(testing::max_error(ce) <= 1e-4, "classifier worst " + testing::worst(ce));
  out.require(testing::max_error(ge) <= 1e-4, "grounding worst " + testing::worst(ge));
  out.require(secs < 30.0, "runtime " + fmt("%.1f s", secs));
  out.note("worst " + testing::worst(ge) + "; max rel err cls " + fmt("%.2e", testing::max_error(ce)) + " grd " +
           fmt("%.2e", testing::max_error(ge)) + " over " +
           std::to_string(ce.size() + ge.size()) + " tensors, " + fmt("%.1f s", secs));
  return out;
}

// ---- A2 ----------------------------------------------------------------------------

Outcome a2_double_softmax() {
  Outcome out;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> dim(1, 8);
  double worst_entity = 0.0, worst_role = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = dim(rng), n = dim(rng);
    const auto t = double_softmax(random_matrix(rng, m, n, 3.0), random_matrix(rng, m, n, 3.0));
    for (int r = 0; r < 2; ++r) {
      const Matrix sums = t.entity_factor[r].rowwise().sum();
      worst_entity = std::max(worst_entity, (sums.array() - 1.0).abs().maxCoeff());
    }
    worst_role = std::max(
        worst_role, ((t.role_factor[0] + t.role_factor[1]).array() - 1.0).abs().maxCoeff());
  }
  Matrix a1(1, 2), a2(1, 2);
  a1 << 2, 0;
  a2 << 0, 0;
  const auto w = double_softmax(a1, a2);
  const double expected[2][2] = {{0.7758, 0.0596}, {0.0596, 0.25}};
  double worst_example = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int i = 0; i < 2; ++i) {
      worst_example = std::max(worst_example, std::abs(w.values[r](0, i) - expected[r][i]));
    }
  }
  out.require(worst_entity <= 1e-6, "entity rows off by " + fmt("%.2e", worst_entity));
  out.require(worst_role <= 1e-6, "role pairs off by " + fmt("%.2e", worst_role));
  out.require(worst_example <= 1e-3, "worked example off by " + fmt("%.2e", worst_example));
  out.note("entity " + fmt("%.1e", worst_entity) + " role " + fmt("%.1e", worst_role) +
           " example " + fmt("%.1e", worst_example));
  return out;
}

// ---- A3 ----------------------------------------------------------------------------

double brute_force_min(const Matrix& cost) {
  const int m = static_cast<int>(cost.rows());
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < m; ++i) c += cost(i, perm[i]);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Outcome a3_hungarian() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(3);
  int mismatches = 0, total = 0;
  for (int m = 2; m <= 7; ++m) {
    for (int trial = 0; trial < 1000; ++trial) {
      Matrix cost(m, m);
      // Alternate integer costs (many ties) and continuous ones.
      if (trial % 2 == 0) {
        std::uniform_int_distribution<int> d(0, 9);
        for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = d(rng);
      } else {
        cost = random_matrix(rng, m, m, 5.0);
      }
      // Sums of the same terms in another order can differ in the last bit,
      // so both sides are summed in row order.
      const double solved = assignment_cost(cost, hungarian(cost));
      ++total;
      if (solved != brute_force_min(cost)) ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  out.require(mismatches == 0, std::to_string(mismatches) + " non-optimal");
  out.require(secs < 60.0, "runtime " + fmt("%.1f s", secs));
  out.note(std::to_string(total) + " matrices m=2..7 exact, " + fmt("%.1f s", secs));
  return out;
}

// ---- A4 ----------------------------------------------------------------------------

Outcome a4_metrics() {
  Outcome out;
  std::mt19937_64 rng(4);
  std::vector<VideoEval> videos;
  for (int i = 0; i < 200; ++i) videos.push_back(testing::random_video(rng, i));
  const EvalReport r = evaluate(videos);
  const testing::NaiveMetrics n = testing::naive_evaluate(videos);
  out.require(r.reldet.mean_ap == n.map, "mAP");
  out.require(r.reldet.recall_50 == n.r50, "R@50");
  out.require(r.reldet.recall_100 == n.r100, "R@100");
  out.require(r.reltag.precision_1 == n.p1, "P@1");
  out.require(r.reltag.precision_5 == n.p5, "P@5");
  out.require(r.reltag.precision_10 == n.p10, "P@10");
  for (int k = 0; k < 3; ++k) {
    out.require(r.fraction.single[k] == n.fs[k], "fR_S@" + std::to_string(r.fraction.ks[k]));
    out.require(r.fraction.multi[k] == n.fm[k], "fR_M@" + std::to_string(r.fraction.ks[k]));
  }
  const Tracklet a = constant_tracklet(0, 0, 0, 10), b = constant_tracklet(1, 1, 0, 10);
  VideoEval v;
  v.gts = {testing::triplet(a, 0, b), testing::triplet(a, 1, b)};
  v.preds = {testing::triplet(a, 0, b, 0.9), testing::triplet(a, 2, b, 0.8),
             testing::triplet(a, 1, b, 0.7)};
  const double hand = reldet(std::vector{v}).mean_ap;
  out.require(std::abs(hand - 5.0 / 6.0) < 1e-15, "hand case AP " + fmt("%.6f", hand));
  out.note("200 scenes, " + std::to_string(r.pred_count) + " predictions, " +
           std::to_string(r.hit_count) + " hits, mAP " + fmt("%.4f", r.reldet.mean_ap) +
           "; hand case AP " + fmt("%.6f", hand));
  return out;
}

// ---- A5 ----------------------------------------------------------------------------

Outcome a5_nms_pipeline() {
  Outcome out;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_pair = 0.0;
  int not_idempotent = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<GroundedSlot> slots;
    const int n = 1 + trial % 12;
    for (int i = 0; i < n; ++i) {
      const double s = u(rng) * 0.8;
      slots.push_back({{s, s + 0.05 + u(rng) * (1.0 - s - 0.05)}, std::round(u(rng) * 10) / 10, i});
    }
    const auto kept = temporal_nms(slots, 0.8);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        worst_pair = std::max(worst_pair, temporal_iou(kept[i].slot, kept[j].slot));
      }
    }
    const auto again = temporal_nms(kept, 0.8);
    bool same = again.size() == kept.size();
    for (std::size_t i = 0; same && i < kept.size(); ++i) {
      same = again[i].slot == kept[i].slot && again[i].score == kept[i].score;
    }
    if (!same) ++not_idempotent;
  }
  out.require(worst_pair <= 0.8, "pairwise tIoU " + fmt("%.4f", worst_pair));
  out.require(not_idempotent == 0, std::to_string(not_idempotent) + " non-idempotent");

  // Worked case: overlap (0.25, 0.75) against a grounded (0.25, 0.70): tIoU 0.9.
  const std::vector<Tracklet> entities = {constant_tracklet(0, 0, 0, 30),
                                          constant_tracklet(1, 1, 10, 40)};
  const Candidate c{0, 1, 2, 0.5, {0.25, 0.75}};
  const InferenceOptions opts;
  const std::vector<GroundedSlot> near = {{{0.25, 0.70}, 0.9, 3}};
  const auto worked = ground_candidate(c, entities, 40, near, opts);
  out.require(worked.size() == 1 && worked[0].slot == c.overlap && worked[0].score == 0.5,
              "tIoU 0.9 case kept " + std::to_string(worked.size()) + " slots");

  // Random pipeline contract: overlap slot present at the candidate
  // probability whenever a grounded slot reaches the floor; otherwise nothing.
  int contract_breaks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<GroundedSlot> g;
    const int k = 1 + trial % 6;
    for (int i = 0; i < k; ++i) {
      const double s = u(rng) * 0.8;
      g.push_back({{s, s + 0.05 + u(rng) * 0.2}, u(rng) * 0.4, i});
    }
    double best = 0.0;
    for (const auto& s : g) best = std::max(best, s.score);
    const auto t = ground_candidate(c, entities, 40, g, opts);
    if (best < opts.score_floor) {
      if (!t.empty()) ++contract_breaks;
      continue;
    }
    const bool has_overlap = std::any_of(t.begin(), t.end(), [&](const RelationTriplet& r) {
      return r.slot == c.overlap && r.score == c.probability;
    });
    if (!has_overlap || t.empty() || t[0].slot != c.overlap) ++contract_breaks;
  }
  out.require(contract_breaks == 0, std::to_string(contract_breaks) + " pipeline contract breaks");
  out.note("max post-NMS tIoU " + fmt("%.4f", worst_pair) +
           ", idempotent, worked case suppressed, 1000 pipeline trials");
  return out;
}

// ---- A6 ----------------------------------------------------------------------------

Outcome a6_end_to_end() {
  Outcome out;
  const SynthConfig sc;
  std::vector<SceneRecord> train, held_out;
  for (int i = 0; i < 200; ++i) train.push_back(generate_scene(sc, i));
  for (int i = 200; i < 250; ++i) held_out.push_back(generate_scene(sc, i));
  const auto t0 = std::chrono::steady_clock::now();

  const ClassifierConfig cc = ClassifierConfig::desk();
  Classifier cls(cc);
  std::vector<TemporalBipartiteGraph> graphs;
  for (const auto& s : train) graphs.push_back(to_graph(s));
  cls.set_prior(build_prior(graphs, cc.entity_categories, cc.predicate_categories));
  const auto cls_log = train_classifier(cls, train, desk_classifier_schedule());
  const double cls_secs = seconds_since(t0);

  GroundingModel grd(GroundingConfig::desk());
  const auto grd_log = train_grounding(grd, train, desk_grounding_schedule());
  const double secs = seconds_since(t0);

  const auto preds = infer_scenes(cls, &grd, held_out, InferMode::kGrounded, InferenceOptions{});
  const EvalReport r = evaluate(make_eval_set(held_out, preds));
  out.require(secs < 900.0, "training took " + fmt("%.0f s", secs));
  out.require(r.reltag.precision_1 >= 0.80, "P@1 " + fmt("%.4f", r.reltag.precision_1));
  out.require(r.reldet.mean_ap >= 0.50, "mAP " + fmt("%.4f", r.reldet.mean_ap));
  out.note("P@1 " + fmt("%.4f", r.reltag.precision_1) + " mAP " + fmt("%.4f", r.reldet.mean_ap) +
           " R@50 " + fmt("%.4f", r.reldet.recall_50) + ", train " + fmt("%.0f s", secs) +
           " (classifier " + fmt("%.0f s", cls_secs) + ", final losses " +
           fmt("%.3f", cls_log.back().loss) + " / " + fmt("%.3f", grd_log.back().loss) + ")");
  return out;
}

// ---- A7 ----------------------------------------------------------------------------

constexpr int kA7TrainScenes = 100;
constexpr int kA7HeldOut = 40;
constexpr int kA7Epochs = 20;

FractionRecallMetrics a7_fraction_recall(std::uint64_t seed, int bins) {
  SynthConfig sc;
  sc.seed = seed;
  std::vector<SceneRecord> train, held_out;
  for (int i = 0; i < kA7TrainScenes; ++i) train.push_back(generate_scene(sc, i));
  for (int i = 0; i < kA7HeldOut; ++i) {
    held_out.push_back(generate_scene(sc, kA7TrainScenes + i));
  }
  GroundingConfig gc = GroundingConfig::desk();
  gc.bins = bins;
  gc.seed = seed;
  GroundingModel grd(gc);
  TrainOptions o = desk_grounding_schedule();
  o.epochs = kA7Epochs;
  o.lr.milestones = {kA7Epochs * 3 / 5, kA7Epochs * 17 / 20};
  o.seed = seed;
  train_grounding(grd, train, o);
  // Classification is taken from the ground truth so only grounding varies.
  Predictions preds;
  for (const auto& s : held_out) {
    preds[s.video_id] =
        ground_queries(grd, s, oracle_queries(s, gc.predicate_categories), InferenceOptions{});
  }
  return evaluate(make_eval_set(held_out, preds)).fraction;
}

Outcome a7_bins_trend() {
  Outcome out;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto k1 = a7_fraction_recall(seed, 1);
    const auto k10 = a7_fraction_recall(seed, 10);
    const double m1 = k1.multi[0], m10 = k10.multi[0];
    const double s1 = k1.single[0], s10 = k10.single[0];
    const double gain_m = m1 > 0 ? (m10 - m1) / m1 : std::numeric_limits<double>::infinity();
    const double gain_s = s1 > 0 ? (s10 - s1) / s1 : std::numeric_limits<double>::infinity();
    const std::string tag = "seed " + std::to_string(seed);
    out.require(m10 > m1, tag + ": fR_M K=10 not above K=1");
    out.require(gain_m > gain_s, tag + ": fR_M gain not above fR_S gain");
    out.note(tag + " fR_M " + fmt("%.3f", m1) + "->" + fmt("%.3f", m10) + " fR_S " +
             fmt("%.3f", s1) + "->" + fmt("%.3f", s10));
  }
  return out;
}

// ---- A8 ----------------------------------------------------------------------------

Outcome a8_statistics() {
  Outcome out;
  const SynthConfig sc;
  std::vector<TemporalBipartiteGraph> graphs;
  for (int i = 0; i < 1000; ++i) graphs.push_back(to_graph(generate_scene(sc, i)));
  const InstanceStats st = multi_instance_stats(graphs, 10);
  out.require(std::abs(st.multi_share() - 0.32) <= 0.05,
              "multi-instance share " + fmt("%.4f", st.multi_share()));
  out.require(st.collision_share() < 0.05, "collision share " + fmt("%.4f", st.collision_share()));
  out.note(std::to_string(st.samples) + " samples, multi " + fmt("%.4f", st.multi_share()) +
           ", collisions " + fmt("%.4f", st.collision_share()));
  return out;
}

// ---- A9 ----------------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return files;
}

// Runs the full CLI workflow into `dir`; returns the failing command or "".
std::string run_cli_workflow(const fs::path& dir) {
  const std::string cli = VIDSGG_CLI_PATH;
  const std::string d = dir.string();
  const std::string data = d + "/data";
  const std::string model =
      " --model-dim 16 --heads 2 --hidden 16 --word-dim 8 --epochs 2 --seed 3";
  const std::vector<std::string> cmds = {
      "synth --out " + data + " --scenes 6 --val 3 --seed 7 --frames 32",
      "train-cls --data " + data + " --out " + d + "/ck/cls.ckpt --queries 6" + model,
      "train-grd --data " + data + " --out " + d + "/ck/grd.ckpt --bins 4 --dilations 1 2" + model,
      "infer --data " + data + " --cls " + d + "/ck/cls.ckpt --grd " + d +
          "/ck/grd.ckpt --split val --out " + d + "/out/pred.json",
      "infer --data " + data + " --cls " + d + "/ck/cls.ckpt --mode vidvrd --split val --out " +
          d + "/out/pred_vidvrd.json",
      "eval --data " + data + " --pred " + d + "/out/pred.json --split val --out " + d +
          "/out/report",
      "stats --data " + data + " --split train --bins 10 --out " + d + "/out/stats.json",
  };
  for (const auto& c : cmds) {
    const std::string line = "env -u VIDSGG_DATA -u VIDSGG_CHECKPOINTS -u VIDSGG_OUTPUT \"" +
                             cli + "\" " + c + " > /dev/null 2>&1";
    if (std::system(line.c_str()) != 0) return c.substr(0, c.find(' '));
  }
  return "";
}

Outcome a9_round_trip() {
  Outcome out;
  const fs::path root = fs::temp_directory_path() / ("vidsgg_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);

  const Vocabulary vocab = Vocabulary::numbered(10, 8);
  SynthConfig sc;
  sc.seed = 9;
  int annotation_breaks = 0, prediction_breaks = 0;
  Predictions preds;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    SceneRecord s = generate_scene(sc, i);
    const fs::path p = root / ("scene_" + std::to_string(i) + ".json");
    save_annotation(p, s, vocab);
    s.appearance.clear();
    s.frame_features = Matrix();
    if (!(load_annotation(p, vocab) == s)) ++annotation_breaks;
    auto ts = gt_triplets(s);
    for (auto& t : ts) t.score = round_score(u(rng));
    preds[s.video_id] = std::move(ts);
  }
  save_predictions(root / "pred.json", preds, vocab);
  const Predictions back = load_predictions(root / "pred.json", vocab);
  if (back != preds) ++prediction_breaks;
  save_predictions(root / "pred2.json", back, vocab);
  if (snapshot(root)["pred.json"] != snapshot(root)["pred2.json"]) ++prediction_breaks;
  out.require(annotation_breaks == 0, std::to_string(annotation_breaks) + " annotation mismatches");
  out.require(prediction_breaks == 0, "prediction round-trip differs");

  // Same commands, same directory, twice: every output file must match.
  const fs::path work = root / "cli";
  std::map<std::string, std::string> first;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string failed = run_cli_workflow(work);
    if (!failed.empty()) {
      out.require(false, "CLI " + failed + " failed");
      break;
    }
    const auto files = snapshot(work);
    if (run == 0) {
      first = files;
      continue;
    }
    std::vector<std::string> diff;
    for (const auto& [name, bytes] : files) {
      const auto it = first.find(name);
      if (it == first.end() || it->second != bytes) diff.push_back(name);
    }
    if (files.size() != first.size()) diff.push_back("(file set)");
    std::string names;
    for (const auto& n : diff) names += (names.empty() ? "" : ",") + n;
    out.require(diff.empty(), "differs: " + names);
    out.note("50 annotations and " + std::to_string(preds.size()) +
             " prediction lists round-trip; " + std::to_string(files.size()) +
             " CLI output files identical across runs");
  }
  fs::remove_all(root);
  return out;
}

}  // namespace
}  // namespace vidsgg

int main(int argc, char** argv) {
  using vidsgg::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1", vidsgg::a1_gradients},     {"A2", vidsgg::a2_double_softmax},
      {"A3", vidsgg::a3_hungarian},     {"A4", vidsgg::a4_metrics},
      {"A5", vidsgg::a5_nms_pipeline},  {"A6", vidsgg::a6_end_to_end},
      {"A7", vidsgg::a7_bins_trend},    {"A8", vidsgg::a8_statistics},
      {"A9", vidsgg::a9_round_trip},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), id) == wanted.end()) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s %s  %s\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
