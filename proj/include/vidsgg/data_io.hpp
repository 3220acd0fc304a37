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

// Scene records, synthetic scene generation, annotation / feature /
// prediction files, dataset manifests, checkpoints and corpus statistics.

#ifndef VIDSGG_DATA_IO_HPP_
#define VIDSGG_DATA_IO_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vidsgg/autodiff.hpp"
#include "vidsgg/graph.hpp"

namespace vidsgg {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct RelationInstance {
  int subject_tid = 0;
  int object_tid = 0;
  int predicate = 0;
  int begin_fid = 0;
  int end_fid = 0;  // exclusive
  bool operator==(const RelationInstance&) const = default;
};

struct SceneRecord {
  std::string video_id;
  int frame_count = 0;
  double fps = 16.0;
  std::vector<Tracklet> tracklets;  // Tracklet::id is the tid
  std::vector<RelationInstance> relations;
  std::vector<Matrix> appearance;   // per tracklet; empty when not loaded
  Matrix frame_features;            // T x d_v; empty when not loaded
};

// Exact equality, features included.
bool operator==(const SceneRecord& a, const SceneRecord& b);

// Same-(subject, object, predicate) instances merge into one node, in order
// of first appearance. Throws DataError on unknown tids.
TemporalBipartiteGraph to_graph(const SceneRecord& scene);
std::vector<RelationTriplet> gt_triplets(const SceneRecord& scene);

struct Vocabulary {
  std::vector<std::string> entities;
  std::vector<std::string> predicates;

  static Vocabulary numbered(int entity_count, int predicate_count);
  int entity_index(const std::string& name) const;     // -1 if unknown
  int predicate_index(const std::string& name) const;  // -1 if unknown
  Json to_json() const;
  static Vocabulary from_json(const Json& j);
  bool operator==(const Vocabulary&) const = default;
};

// ---- synthetic scenes ------------------------------------------------------

struct SynthConfig {
  std::uint64_t seed = 0;
  int min_entities = 3;
  int max_entities = 6;
  int entity_categories = 10;
  int predicate_categories = 8;
  int frames = 64;
  int min_relations = 2;
  int max_relations = 6;
  double multi_instance_prob = 0.35;
  double noise = 0.1;
  int appearance_dim = 64;
  int frame_dim = 64;
  double fps = 16.0;
  double code_scale = 2.0;
  // Relation codes are shared by every scene of a corpus.
  std::uint64_t codebook_seed = 0x5eedc0deULL;

  void validate() const;
  Json to_json() const;
  static SynthConfig from_json(const Json& j);
};

// Per-predicate signatures planted into features during relation slots.
struct Codebook {
  Matrix subject;  // |C_p| x d_a
  Matrix object;   // |C_p| x d_a
  Matrix frame;    // |C_p| x d_v
};
Codebook make_codebook(const SynthConfig& cfg);

// Scene `index` of the corpus defined by cfg (deterministic).
SceneRecord generate_scene(const SynthConfig& cfg, int index = 0);

// ---- files -------------------------------------------------------------------

Json scene_to_json(const SceneRecord& scene, const Vocabulary& vocab);
// `where` prefixes error messages. Throws DataError naming the offending path.
SceneRecord scene_from_json(const Json& j, const Vocabulary& vocab,
                            const std::string& where = "");

void save_annotation(const fs::path& path, const SceneRecord& scene,
                     const Vocabulary& vocab);
SceneRecord load_annotation(const fs::path& path, const Vocabulary& vocab);
// A file holding either one scene object or an array of them.
std::vector<SceneRecord> load_annotations(const fs::path& path,
                                          const Vocabulary& vocab);

// Row-major float32 matrix with a JSON sidecar (same stem, ".json").
void write_matrix(const fs::path& path, const Matrix& m, Json sidecar);
Matrix read_matrix(const fs::path& path);
fs::path sidecar_path(const fs::path& path);

void save_features(const fs::path& dir, const SceneRecord& scene);
void load_features(const fs::path& dir, SceneRecord& scene);

using Predictions = std::map<std::string, std::vector<RelationTriplet>>;
void save_predictions(const fs::path& path, const Predictions& preds,
                      const Vocabulary& vocab);
Predictions load_predictions(const fs::path& path, const Vocabulary& vocab);
double round_score(double s);

// ---- datasets ------------------------------------------------------------------

struct SceneEntry {
  std::string video_id;
  std::string annotation;  // relative to the manifest directory
  std::string features;    // directory, relative; may be empty
};

struct Manifest {
  Vocabulary vocabulary;
  int appearance_dim = 0;
  int frame_dim = 0;
  Json generator;  // synth config when generated; null otherwise
  std::vector<SceneEntry> train;
  std::vector<SceneEntry> val;

  Json to_json() const;
  static Manifest from_json(const Json& j);
};

void save_manifest(const fs::path& path, const Manifest& m);
Manifest load_manifest(const fs::path& path);

// Loads one split ("train" or "val") relative to the manifest's directory.
std::vector<SceneRecord> load_split(const fs::path& manifest_path,
                                    const Manifest& m, const std::string& split,
                                    bool with_features);

// Writes `train_scenes + val_scenes` synthetic scenes and a manifest.
Manifest write_synthetic_dataset(const fs::path& dir, const SynthConfig& cfg,
                                 int train_scenes, int val_scenes);

// ---- statistics ------------------------------------------------------------------

struct InstanceStats {
  int samples = 0;
  std::array<int, 3> by_count{};  // 1, 2, >=3 instances
  int bins = 0;                   // K
  int occupied_bins = 0;          // over multi-instance samples
  int collided_bins = 0;          // bins with >= 2 instance centres
  double single_share() const;
  double multi_share() const;
  double collision_share() const;
  Json to_json() const;
};
InstanceStats multi_instance_stats(std::span<const TemporalBipartiteGraph> graphs,
                                   int bins);

// ---- checkpoints -------------------------------------------------------------------

// Binary blob of named float64 tensors plus a JSON manifest next to it
// ("<path>.json") holding `config`.
void save_checkpoint(const fs::path& path, const ad::ParamStore& store,
                     const Json& config);
Json load_checkpoint_config(const fs::path& path);
// Overwrites every parameter of `store`; names and shapes must match.
void load_checkpoint(const fs::path& path, ad::ParamStore& store);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace vidsgg

#endif  // VIDSGG_DATA_IO_HPP_
