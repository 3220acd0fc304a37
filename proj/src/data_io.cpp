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

#include "vidsgg/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "vidsgg/errors.hpp"
#include "vidsgg/grounding.hpp"
#include "vidsgg/nn.hpp"

namespace vidsgg {
namespace {

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 || a == b);
}

[[noreturn]] void data_error(const std::string& where, const std::string& what) {
  throw DataError((where.empty() ? std::string() : where + ": ") + what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) data_error(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) data_error(where + "." + key, "missing field");
  return *it;
}

int int_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_integer()) data_error(where + "." + key, "expected an integer");
  return v.get<int>();
}

double num_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number()) data_error(where + "." + key, "expected a number");
  return v.get<double>();
}

std::string str_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_string()) data_error(where + "." + key, "expected a string");
  return v.get<std::string>();
}

const Json& array_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_array()) data_error(where + "." + key, "expected an array");
  return v;
}

std::string at(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

Json box_json(const Box& b) {
  return Json::array({b[0], b[1], b[2], b[3]});
}

Box box_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) data_error(where, "expected [x1,y1,x2,y2]");
  Box b;
  for (int c = 0; c < 4; ++c) {
    if (!j[c].is_number()) data_error(where, "non-numeric coordinate");
    b[c] = j[c].get<double>();
  }
  return b;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finaliser over the combined words
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int uniform_int(Rng& rng, int lo, int hi) {  // inclusive
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Matrix scaled_rows(Rng& rng, int rows, int cols, double norm) {
  Matrix m = gaussian(rng, rows, cols, 1.0);
  for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) *= norm / m.row(r).norm();
  return m;
}

}  // namespace

bool operator==(const SceneRecord& a, const SceneRecord& b) {
  if (a.video_id != b.video_id || a.frame_count != b.frame_count ||
      a.fps != b.fps || a.tracklets != b.tracklets ||
      a.relations != b.relations || a.appearance.size() != b.appearance.size() ||
      !same_matrix(a.frame_features, b.frame_features)) {
    return false;
  }
  for (std::size_t i = 0; i < a.appearance.size(); ++i) {
    if (!same_matrix(a.appearance[i], b.appearance[i])) return false;
  }
  return true;
}

TemporalBipartiteGraph to_graph(const SceneRecord& scene) {
  TemporalBipartiteGraph g;
  g.frame_count = scene.frame_count;
  g.entities = scene.tracklets;
  std::map<int, int> index_of;
  for (std::size_t i = 0; i < scene.tracklets.size(); ++i) {
    index_of[scene.tracklets[i].id] = static_cast<int>(i);
  }
  std::map<std::tuple<int, int, int>, std::size_t> node_of;
  for (const auto& r : scene.relations) {
    auto s = index_of.find(r.subject_tid);
    auto o = index_of.find(r.object_tid);
    if (s == index_of.end() || o == index_of.end()) {
      data_error(scene.video_id, "relation references an unknown tid");
    }
    const auto key = std::make_tuple(s->second, r.predicate, o->second);
    auto it = node_of.find(key);
    if (it == node_of.end()) {
      it = node_of.emplace(key, g.predicates.size()).first;
      PredicateNode p;
      p.category = r.predicate;
      p.subject = s->second;
      p.object = o->second;
      g.predicates.push_back(p);
    }
    PredicateNode& p = g.predicates[it->second];
    p.time_slots.push_back(
        TimeSlot::from_frames({r.begin_fid, r.end_fid}, scene.frame_count));
    p.slot_scores.push_back(1.0);
  }
  return g;
}

std::vector<RelationTriplet> gt_triplets(const SceneRecord& scene) {
  return to_triplets(to_graph(scene));
}

// ---- vocabulary ----------------------------------------------------------------

Vocabulary Vocabulary::numbered(int entity_count, int predicate_count) {
  Vocabulary v;
  for (int i = 0; i < entity_count; ++i) v.entities.push_back("entity_" + std::to_string(i));
  for (int i = 0; i < predicate_count; ++i) v.predicates.push_back("predicate_" + std::to_string(i));
  return v;
}

int Vocabulary::entity_index(const std::string& name) const {
  auto it = std::find(entities.begin(), entities.end(), name);
  return it == entities.end() ? -1 : static_cast<int>(it - entities.begin());
}

int Vocabulary::predicate_index(const std::string& name) const {
  auto it = std::find(predicates.begin(), predicates.end(), name);
  return it == predicates.end() ? -1 : static_cast<int>(it - predicates.begin());
}

Json Vocabulary::to_json() const {
  return Json{{"entities", entities}, {"predicates", predicates}};
}

Vocabulary Vocabulary::from_json(const Json& j) {
  Vocabulary v;
  for (const auto& e : array_field(j, "entities", "vocabulary")) {
    if (!e.is_string()) data_error("vocabulary.entities", "expected strings");
    v.entities.push_back(e.get<std::string>());
  }
  for (const auto& e : array_field(j, "predicates", "vocabulary")) {
    if (!e.is_string()) data_error("vocabulary.predicates", "expected strings");
    v.predicates.push_back(e.get<std::string>());
  }
  return v;
}

// ---- synthetic -------------------------------------------------------------------

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw InvalidInput("synth config: " + what);
  };
  if (min_entities < 2 || max_entities < min_entities) fail("entity range");
  if (min_relations < 1 || max_relations < min_relations) fail("relation range");
  if (entity_categories < 1 || predicate_categories < 1) fail("category counts");
  if (frames < 32) fail("frames must be >= 32");
  if (!(multi_instance_prob >= 0.0 && multi_instance_prob <= 1.0)) {
    fail("multi_instance_prob must be in [0,1]");
  }
  if (!(noise >= 0.0)) fail("noise must be >= 0");
  if (appearance_dim < entity_categories) fail("appearance_dim < entity categories");
  if (frame_dim < 1) fail("frame_dim");
  if (!(fps > 0.0)) fail("fps");
}

Json SynthConfig::to_json() const {
  return Json{{"seed", seed},
              {"min_entities", min_entities},
              {"max_entities", max_entities},
              {"entity_categories", entity_categories},
              {"predicate_categories", predicate_categories},
              {"frames", frames},
              {"min_relations", min_relations},
              {"max_relations", max_relations},
              {"multi_instance_prob", multi_instance_prob},
              {"noise", noise},
              {"appearance_dim", appearance_dim},
              {"frame_dim", frame_dim},
              {"fps", fps},
              {"code_scale", code_scale},
              {"codebook_seed", codebook_seed}};
}

SynthConfig SynthConfig::from_json(const Json& j) {
  SynthConfig c;
  c.seed = j.value("seed", c.seed);
  c.min_entities = j.value("min_entities", c.min_entities);
  c.max_entities = j.value("max_entities", c.max_entities);
  c.entity_categories = j.value("entity_categories", c.entity_categories);
  c.predicate_categories = j.value("predicate_categories", c.predicate_categories);
  c.frames = j.value("frames", c.frames);
  c.min_relations = j.value("min_relations", c.min_relations);
  c.max_relations = j.value("max_relations", c.max_relations);
  c.multi_instance_prob = j.value("multi_instance_prob", c.multi_instance_prob);
  c.noise = j.value("noise", c.noise);
  c.appearance_dim = j.value("appearance_dim", c.appearance_dim);
  c.frame_dim = j.value("frame_dim", c.frame_dim);
  c.fps = j.value("fps", c.fps);
  c.code_scale = j.value("code_scale", c.code_scale);
  c.codebook_seed = j.value("codebook_seed", c.codebook_seed);
  return c;
}

Codebook make_codebook(const SynthConfig& cfg) {
  Rng rng(cfg.codebook_seed);
  Codebook cb;
  cb.subject = scaled_rows(rng, cfg.predicate_categories, cfg.appearance_dim,
                           cfg.code_scale);
  cb.object = scaled_rows(rng, cfg.predicate_categories, cfg.appearance_dim,
                          cfg.code_scale);
  cb.frame = scaled_rows(rng, cfg.predicate_categories, cfg.frame_dim,
                         cfg.code_scale);
  return cb;
}

SceneRecord generate_scene(const SynthConfig& cfg, int index) {
  cfg.validate();
  Rng rng(mix(cfg.seed, static_cast<std::uint64_t>(index)));
  const int t_count = cfg.frames;
  SceneRecord scene;
  scene.video_id = "synth_" + std::to_string(cfg.seed) + "_" +
                   std::to_string(index);
  scene.frame_count = t_count;
  scene.fps = cfg.fps;

  // Spans start in the first quarter and end in the last quarter so that
  // every pair overlaps for at least half of the video.
  const int quarter = t_count / 4;
  const int n = uniform_int(rng, cfg.min_entities, cfg.max_entities);
  for (int i = 0; i < n; ++i) {
    Tracklet t;
    t.id = i;
    t.category = uniform_int(rng, 0, cfg.entity_categories - 1);
    t.begin_frame = uniform_int(rng, 0, quarter - 1);
    const int end = uniform_int(rng, t_count - quarter + 1, t_count);
    const double w = uniform_real(rng, 0.1, 0.3);
    const double h = uniform_real(rng, 0.1, 0.3);
    const double x0 = uniform_real(rng, 0.0, 1.0 - w);
    const double y0 = uniform_real(rng, 0.0, 1.0 - h);
    const double x1 = uniform_real(rng, 0.0, 1.0 - w);
    const double y1 = uniform_real(rng, 0.0, 1.0 - h);
    const int len = end - t.begin_frame;
    for (int f = 0; f < len; ++f) {
      const double a = len > 1 ? static_cast<double>(f) / (len - 1) : 0.0;
      const double x = x0 + a * (x1 - x0);
      const double y = y0 + a * (y1 - y0);
      t.boxes.push_back({x, y, x + w, y + h});
    }
    scene.tracklets.push_back(std::move(t));
  }

  // Distinct predicates per scene keep planted frame codes unambiguous.
  std::vector<int> predicates(cfg.predicate_categories);
  for (int p = 0; p < cfg.predicate_categories; ++p) predicates[p] = p;
  std::shuffle(predicates.begin(), predicates.end(), rng);
  const int r_count = std::min(
      uniform_int(rng, cfg.min_relations, cfg.max_relations),
      cfg.predicate_categories);
  for (int r = 0; r < r_count; ++r) {
    const int s = uniform_int(rng, 0, n - 1);
    int o = uniform_int(rng, 0, n - 2);
    if (o >= s) ++o;
    const auto overlap =
        *intersect(scene.tracklets[s].frames(), scene.tracklets[o].frames());
    const bool multi =
        std::bernoulli_distribution(cfg.multi_instance_prob)(rng);
    const int count = multi ? uniform_int(rng, 2, 3) : 1;
    const double seg = static_cast<double>(overlap.length()) / count;
    for (int k = 0; k < count; ++k) {
      const double lo = count == 1 ? 0.55 : 0.5;
      const double hi = count == 1 ? 1.0 : 0.8;
      const double len = seg * uniform_real(rng, lo, hi);
      const double seg_begin = overlap.begin + k * seg;
      const double start = seg_begin + uniform_real(rng, 0.0, seg - len);
      int b = static_cast<int>(std::lround(start));
      int e = static_cast<int>(std::lround(start + len));
      const int seg_lo = static_cast<int>(std::lround(seg_begin));
      const int seg_hi = static_cast<int>(std::lround(seg_begin + seg));
      b = std::clamp(b, seg_lo, seg_hi - 1);
      e = std::clamp(e, b + 1, seg_hi);
      scene.relations.push_back({s, o, predicates[r], b, e});
    }
  }

  // Features: category one-hot, role codes during slots, noise.
  const Codebook cb = make_codebook(cfg);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const auto& t : scene.tracklets) {
    Matrix a(t.length(), cfg.appearance_dim);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = cfg.noise * noise(rng);
    a.col(t.category).array() += 1.0;
    scene.appearance.push_back(std::move(a));
  }
  Matrix frames(t_count, cfg.frame_dim);
  for (Eigen::Index i = 0; i < frames.size(); ++i) {
    frames.data()[i] = cfg.noise * noise(rng);
  }
  for (const auto& r : scene.relations) {
    Matrix& sa = scene.appearance[r.subject_tid];
    Matrix& oa = scene.appearance[r.object_tid];
    const int sb = scene.tracklets[r.subject_tid].begin_frame;
    const int ob = scene.tracklets[r.object_tid].begin_frame;
    for (int f = r.begin_fid; f < r.end_fid; ++f) {
      sa.row(f - sb) += cb.subject.row(r.predicate);
      oa.row(f - ob) += cb.object.row(r.predicate);
      frames.row(f) += cb.frame.row(r.predicate);
    }
  }
  scene.frame_features = std::move(frames);
  return scene;
}

// ---- annotation JSON ------------------------------------------------------------

Json scene_to_json(const SceneRecord& scene, const Vocabulary& vocab) {
  Json j;
  j["video_id"] = scene.video_id;
  j["fps"] = scene.fps;
  j["frame_count"] = scene.frame_count;
  Json objects = Json::array();
  for (const auto& t : scene.tracklets) {
    if (t.category < 0 || t.category >= static_cast<int>(vocab.entities.size())) {
      throw InvalidInput("scene_to_json: entity category outside vocabulary");
    }
    objects.push_back({{"tid", t.id}, {"category", vocab.entities[t.category]}});
  }
  j["subject/objects"] = std::move(objects);
  Json traj = Json::array();
  for (int f = 0; f < scene.frame_count; ++f) {
    Json frame = Json::array();
    for (const auto& t : scene.tracklets) {
      if (f < t.begin_frame || f >= t.end_frame()) continue;
      const Box& b = t.boxes[f - t.begin_frame];
      frame.push_back({{"tid", t.id},
                       {"bbox",
                        {{"xmin", b[0]}, {"ymin", b[1]}, {"xmax", b[2]},
                         {"ymax", b[3]}}}});
    }
    traj.push_back(std::move(frame));
  }
  j["trajectories"] = std::move(traj);
  Json rels = Json::array();
  for (const auto& r : scene.relations) {
    if (r.predicate < 0 ||
        r.predicate >= static_cast<int>(vocab.predicates.size())) {
      throw InvalidInput("scene_to_json: predicate outside vocabulary");
    }
    rels.push_back({{"subject_tid", r.subject_tid},
                    {"object_tid", r.object_tid},
                    {"predicate", vocab.predicates[r.predicate]},
                    {"begin_fid", r.begin_fid},
                    {"end_fid", r.end_fid}});
  }
  j["relation_instances"] = std::move(rels);
  return j;
}

SceneRecord scene_from_json(const Json& j, const Vocabulary& vocab,
                            const std::string& where) {
  SceneRecord s;
  s.video_id = str_field(j, "video_id", where);
  s.fps = num_field(j, "fps", where);
  s.frame_count = int_field(j, "frame_count", where);
  if (s.frame_count < 1) data_error(where + ".frame_count", "must be >= 1");

  std::map<int, std::size_t> index_of;
  const std::string objs = where + ".subject/objects";
  const Json& objects = array_field(j, "subject/objects", where);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    Tracklet t;
    t.id = int_field(objects[i], "tid", at(objs, i));
    const std::string cat = str_field(objects[i], "category", at(objs, i));
    t.category = vocab.entity_index(cat);
    if (t.category < 0) {
      data_error(at(objs, i) + ".category", "unknown category '" + cat + "'");
    }
    if (!index_of.emplace(t.id, s.tracklets.size()).second) {
      data_error(at(objs, i) + ".tid", "duplicate tid " + std::to_string(t.id));
    }
    t.begin_frame = -1;
    s.tracklets.push_back(std::move(t));
  }

  const std::string trj = where + ".trajectories";
  const Json& traj = array_field(j, "trajectories", where);
  if (static_cast<int>(traj.size()) != s.frame_count) {
    data_error(trj, "expected " + std::to_string(s.frame_count) + " frames, got " +
                        std::to_string(traj.size()));
  }
  for (std::size_t f = 0; f < traj.size(); ++f) {
    if (!traj[f].is_array()) data_error(at(trj, f), "expected an array");
    for (std::size_t k = 0; k < traj[f].size(); ++k) {
      const std::string here = at(at(trj, f), k);
      const int tid = int_field(traj[f][k], "tid", here);
      auto it = index_of.find(tid);
      if (it == index_of.end()) {
        data_error(here + ".tid", "unknown tid " + std::to_string(tid));
      }
      const Json& bb = field(traj[f][k], "bbox", here);
      const std::string bw = here + ".bbox";
      const Box b{num_field(bb, "xmin", bw), num_field(bb, "ymin", bw),
                  num_field(bb, "xmax", bw), num_field(bb, "ymax", bw)};
      Tracklet& t = s.tracklets[it->second];
      if (t.begin_frame < 0) {
        t.begin_frame = static_cast<int>(f);
      } else if (t.end_frame() != static_cast<int>(f)) {
        data_error(here, "tid " + std::to_string(tid) + " is not contiguous");
      }
      t.boxes.push_back(b);
    }
  }
  for (std::size_t i = 0; i < s.tracklets.size(); ++i) {
    if (s.tracklets[i].boxes.empty()) {
      data_error(at(objs, i), "tid " + std::to_string(s.tracklets[i].id) +
                                  " has no trajectory");
    }
  }

  const std::string rel = where + ".relation_instances";
  const Json& rels = array_field(j, "relation_instances", where);
  for (std::size_t i = 0; i < rels.size(); ++i) {
    const std::string here = at(rel, i);
    RelationInstance r;
    r.subject_tid = int_field(rels[i], "subject_tid", here);
    r.object_tid = int_field(rels[i], "object_tid", here);
    for (const auto& [key, tid] :
         {std::pair{"subject_tid", r.subject_tid}, {"object_tid", r.object_tid}}) {
      if (!index_of.count(tid)) {
        data_error(here + "." + key, "unknown tid " + std::to_string(tid));
      }
    }
    const std::string pred = str_field(rels[i], "predicate", here);
    r.predicate = vocab.predicate_index(pred);
    if (r.predicate < 0) {
      data_error(here + ".predicate", "unknown predicate '" + pred + "'");
    }
    r.begin_fid = int_field(rels[i], "begin_fid", here);
    r.end_fid = int_field(rels[i], "end_fid", here);
    if (r.begin_fid < 0 || r.end_fid > s.frame_count || r.begin_fid >= r.end_fid) {
      data_error(here, "fid range [" + std::to_string(r.begin_fid) + ", " +
                           std::to_string(r.end_fid) + ") out of range");
    }
    s.relations.push_back(r);
  }
  return s;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

namespace {
Json parse_file(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}
}  // namespace

void save_annotation(const fs::path& path, const SceneRecord& scene,
                     const Vocabulary& vocab) {
  write_text(path, scene_to_json(scene, vocab).dump() + "\n");
}

SceneRecord load_annotation(const fs::path& path, const Vocabulary& vocab) {
  return scene_from_json(parse_file(path), vocab, path.filename().string());
}

std::vector<SceneRecord> load_annotations(const fs::path& path,
                                          const Vocabulary& vocab) {
  const Json j = parse_file(path);
  const std::string where = path.filename().string();
  std::vector<SceneRecord> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(scene_from_json(j[i], vocab, at(where, i)));
    }
  } else {
    out.push_back(scene_from_json(j, vocab, where));
  }
  return out;
}

// ---- matrices / features ------------------------------------------------------------

fs::path sidecar_path(const fs::path& path) {
  fs::path p = path;
  p.replace_extension(".json");
  return p;
}

void write_matrix(const fs::path& path, const Matrix& m, Json sidecar) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  sidecar["rows"] = m.rows();
  sidecar["cols"] = m.cols();
  sidecar["dtype"] = "float32";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  std::vector<float> buf(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) buf[i] = static_cast<float>(m.data()[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw DataError("write failed: " + path.string());
  write_text(sidecar_path(path), sidecar.dump() + "\n");
}

Matrix read_matrix(const fs::path& path) {
  const Json side = parse_file(sidecar_path(path));
  const std::string where = sidecar_path(path).filename().string();
  const Json& rows_j = side.contains("rows") ? side["rows"] : field(side, "T", where);
  const Json& cols_j = side.contains("cols") ? side["cols"] : field(side, "d_v", where);
  if (!rows_j.is_number_integer() || !cols_j.is_number_integer()) {
    data_error(where, "shape must be integers");
  }
  const long rows = rows_j.get<long>(), cols = cols_j.get<long>();
  if (rows < 0 || cols < 0) data_error(where, "negative shape");
  const std::string bytes = read_text(path);
  const std::size_t expect = static_cast<std::size_t>(rows * cols) * sizeof(float);
  if (bytes.size() != expect) {
    data_error(path.filename().string(),
               "expected " + std::to_string(expect) + " bytes, got " +
                   std::to_string(bytes.size()));
  }
  Matrix m(rows, cols);
  for (long i = 0; i < rows * cols; ++i) {
    float v;
    std::memcpy(&v, bytes.data() + i * sizeof(float), sizeof(float));
    if (!std::isfinite(v)) data_error(path.filename().string(), "non-finite entry");
    m.data()[i] = v;
  }
  return m;
}

void save_features(const fs::path& dir, const SceneRecord& scene) {
  for (std::size_t i = 0; i < scene.appearance.size(); ++i) {
    const int tid = scene.tracklets[i].id;
    write_matrix(dir / ("tracklet_" + std::to_string(tid) + ".f32"),
                 scene.appearance[i],
                 Json{{"video_id", scene.video_id}, {"tid", tid}});
  }
  if (scene.frame_features.size() > 0) {
    write_matrix(dir / "frames.f32", scene.frame_features,
                 Json{{"video_id", scene.video_id},
                      {"T", scene.frame_features.rows()},
                      {"d_v", scene.frame_features.cols()},
                      {"fps", scene.fps}});
  }
}

void load_features(const fs::path& dir, SceneRecord& scene) {
  scene.appearance.clear();
  for (const auto& t : scene.tracklets) {
    Matrix a = read_matrix(dir / ("tracklet_" + std::to_string(t.id) + ".f32"));
    if (a.rows() != t.length()) {
      data_error(scene.video_id, "appearance rows != tracklet length for tid " +
                                     std::to_string(t.id));
    }
    scene.appearance.push_back(std::move(a));
  }
  scene.frame_features = read_matrix(dir / "frames.f32");
  if (scene.frame_features.rows() != scene.frame_count) {
    data_error(scene.video_id, "frame feature rows != frame_count");
  }
}

// ---- predictions ------------------------------------------------------------------------

double round_score(double s) { return std::round(s * 1e6) / 1e6; }

void save_predictions(const fs::path& path, const Predictions& preds,
                      const Vocabulary& vocab) {
  Json j = Json::object();
  for (const auto& [vid, list] : preds) {
    Json arr = Json::array();
    for (const auto& r : list) {
      Json sub = Json::array(), obj = Json::array();
      for (const auto& b : r.subject.boxes) sub.push_back(box_json(b));
      for (const auto& b : r.object.boxes) obj.push_back(box_json(b));
      arr.push_back({{"triplet",
                      {vocab.entities.at(r.subject.category),
                       vocab.predicates.at(r.predicate),
                       vocab.entities.at(r.object.category)}},
                     {"score", round_score(r.score)},
                     {"duration",
                      {r.subject.begin_frame, r.subject.end_frame()}},
                     {"slot", {r.slot.start, r.slot.end}},
                     {"sub_tid", r.subject.id},
                     {"obj_tid", r.object.id},
                     {"sub_traj", std::move(sub)},
                     {"obj_traj", std::move(obj)}});
    }
    j[vid] = std::move(arr);
  }
  write_text(path, j.dump() + "\n");
}

Predictions load_predictions(const fs::path& path, const Vocabulary& vocab) {
  const Json j = parse_file(path);
  const std::string root = path.filename().string();
  if (!j.is_object()) data_error(root, "expected an object keyed by video_id");
  Predictions out;
  for (const auto& [vid, arr] : j.items()) {
    const std::string vw = root + "." + vid;
    if (!arr.is_array()) data_error(vw, "expected an array");
    auto& list = out[vid];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string here = at(vw, i);
      const Json& e = arr[i];
      const Json& trip = field(e, "triplet", here);
      if (!trip.is_array() || trip.size() != 3 || !trip[0].is_string() ||
          !trip[1].is_string() || !trip[2].is_string()) {
        data_error(here + ".triplet", "expected [subject, predicate, object] names");
      }
      RelationTriplet r;
      r.subject.category = vocab.entity_index(trip[0].get<std::string>());
      r.predicate = vocab.predicate_index(trip[1].get<std::string>());
      r.object.category = vocab.entity_index(trip[2].get<std::string>());
      if (r.subject.category < 0 || r.predicate < 0 || r.object.category < 0) {
        data_error(here + ".triplet", "category outside vocabulary");
      }
      r.score = num_field(e, "score", here);
      const Json& dur = field(e, "duration", here);
      if (!dur.is_array() || dur.size() != 2 || !dur[0].is_number_integer() ||
          !dur[1].is_number_integer()) {
        data_error(here + ".duration", "expected [begin_fid, end_fid]");
      }
      const int b = dur[0].get<int>(), en = dur[1].get<int>();
      r.subject.begin_frame = r.object.begin_frame = b;
      r.subject.id = e.value("sub_tid", -1);
      r.object.id = e.value("obj_tid", -1);
      const Json& st = array_field(e, "sub_traj", here);
      const Json& ot = array_field(e, "obj_traj", here);
      for (std::size_t k = 0; k < st.size(); ++k) {
        r.subject.boxes.push_back(box_from(st[k], at(here + ".sub_traj", k)));
      }
      for (std::size_t k = 0; k < ot.size(); ++k) {
        r.object.boxes.push_back(box_from(ot[k], at(here + ".obj_traj", k)));
      }
      if (r.subject.length() != en - b || r.object.length() != en - b) {
        data_error(here, "trajectory length does not match duration");
      }
      if (e.contains("slot")) {
        const Json& sl = e["slot"];
        if (!sl.is_array() || sl.size() != 2) data_error(here + ".slot", "expected [s, e]");
        r.slot = {sl[0].get<double>(), sl[1].get<double>()};
      }
      list.push_back(std::move(r));
    }
  }
  return out;
}

// ---- manifest ---------------------------------------------------------------------------

Json Manifest::to_json() const {
  auto entries = [](const std::vector<SceneEntry>& v) {
    Json a = Json::array();
    for (const auto& e : v) {
      a.push_back({{"video_id", e.video_id},
                   {"annotation", e.annotation},
                   {"features", e.features}});
    }
    return a;
  };
  return Json{{"format", "vidsgg-dataset/1"},
              {"vocabulary", vocabulary.to_json()},
              {"appearance_dim", appearance_dim},
              {"frame_dim", frame_dim},
              {"generator", generator},
              {"train", entries(train)},
              {"val", entries(val)}};
}

Manifest Manifest::from_json(const Json& j) {
  Manifest m;
  m.vocabulary = Vocabulary::from_json(field(j, "vocabulary", "manifest"));
  m.appearance_dim = int_field(j, "appearance_dim", "manifest");
  m.frame_dim = int_field(j, "frame_dim", "manifest");
  if (j.contains("generator")) m.generator = j["generator"];
  for (const char* split : {"train", "val"}) {
    auto& dst = std::string(split) == "train" ? m.train : m.val;
    const std::string w = std::string("manifest.") + split;
    const Json& arr = array_field(j, split, "manifest");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      SceneEntry e;
      e.video_id = str_field(arr[i], "video_id", at(w, i));
      e.annotation = str_field(arr[i], "annotation", at(w, i));
      e.features = arr[i].value("features", std::string());
      dst.push_back(std::move(e));
    }
  }
  return m;
}

void save_manifest(const fs::path& path, const Manifest& m) {
  write_text(path, m.to_json().dump(2) + "\n");
}

Manifest load_manifest(const fs::path& path) {
  return Manifest::from_json(parse_file(path));
}

std::vector<SceneRecord> load_split(const fs::path& manifest_path,
                                    const Manifest& m, const std::string& split,
                                    bool with_features) {
  if (split != "train" && split != "val") {
    throw InvalidInput("unknown split '" + split + "'");
  }
  const fs::path base = manifest_path.parent_path();
  const auto& entries = split == "train" ? m.train : m.val;
  std::vector<SceneRecord> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    SceneRecord s = load_annotation(base / e.annotation, m.vocabulary);
    if (with_features) {
      if (e.features.empty()) data_error(e.video_id, "no feature directory");
      load_features(base / e.features, s);
    }
    out.push_back(std::move(s));
  }
  return out;
}

Manifest write_synthetic_dataset(const fs::path& dir, const SynthConfig& cfg,
                                 int train_scenes, int val_scenes) {
  cfg.validate();
  if (train_scenes < 0 || val_scenes < 0) {
    throw InvalidInput("scene counts must be >= 0");
  }
  fs::create_directories(dir);
  Manifest m;
  m.vocabulary = Vocabulary::numbered(cfg.entity_categories, cfg.predicate_categories);
  m.appearance_dim = cfg.appearance_dim;
  m.frame_dim = cfg.frame_dim;
  m.generator = cfg.to_json();
  for (int i = 0; i < train_scenes + val_scenes; ++i) {
    const SceneRecord s = generate_scene(cfg, i);
    SceneEntry e;
    e.video_id = s.video_id;
    e.annotation = "annotations/" + s.video_id + ".json";
    e.features = "features/" + s.video_id;
    save_annotation(dir / e.annotation, s, m.vocabulary);
    save_features(dir / e.features, s);
    (i < train_scenes ? m.train : m.val).push_back(std::move(e));
  }
  save_manifest(dir / "manifest.json", m);
  return m;
}

// ---- statistics ----------------------------------------------------------------------------

double InstanceStats::single_share() const {
  return samples == 0 ? 0.0 : static_cast<double>(by_count[0]) / samples;
}

double InstanceStats::multi_share() const {
  return samples == 0 ? 0.0
                      : static_cast<double>(by_count[1] + by_count[2]) / samples;
}

double InstanceStats::collision_share() const {
  return occupied_bins == 0 ? 0.0
                            : static_cast<double>(collided_bins) / occupied_bins;
}

Json InstanceStats::to_json() const {
  const double n = samples == 0 ? 1.0 : static_cast<double>(samples);
  return Json{{"samples", samples},
              {"single_instance", by_count[0]},
              {"two_instances", by_count[1]},
              {"three_or_more", by_count[2]},
              {"share_single", by_count[0] / n},
              {"share_two", by_count[1] / n},
              {"share_three_or_more", by_count[2] / n},
              {"share_multi", multi_share()},
              {"bins", bins},
              {"occupied_bins", occupied_bins},
              {"collided_bins", collided_bins},
              {"share_collided_bins", collision_share()}};
}

InstanceStats multi_instance_stats(std::span<const TemporalBipartiteGraph> graphs,
                                   int bins) {
  if (bins < 1) throw InvalidInput("multi_instance_stats: bins must be >= 1");
  InstanceStats st;
  st.bins = bins;
  for (const auto& g : graphs) {
    for (const auto& p : g.predicates) {
      const int k = p.instance_count();
      if (k < 1) continue;
      ++st.samples;
      ++st.by_count[std::min(k, 3) - 1];
      if (k < 2) continue;
      std::map<int, int> per_bin;
      for (const auto& s : p.time_slots) ++per_bin[bin_of(s.center(), bins)];
      for (const auto& [b, c] : per_bin) {
        ++st.occupied_bins;
        if (c >= 2) ++st.collided_bins;
      }
    }
  }
  return st;
}

// ---- checkpoints ------------------------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'V', 'S', 'G', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& where) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError(where + ": truncated checkpoint");
  return v;
}

fs::path checkpoint_manifest(const fs::path& path) {
  return fs::path(path.string() + ".json");
}
}  // namespace

void save_checkpoint(const fs::path& path, const ad::ParamStore& store,
                     const Json& config) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const auto params = store.all();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  Json tensors = Json::array();
  for (const ad::Parameter* p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::int64_t>(out, p->value.rows());
    put<std::int64_t>(out, p->value.cols());
    put<std::uint8_t>(out, p->trainable ? 1 : 0);
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    tensors.push_back({{"name", p->name},
                       {"shape", {p->value.rows(), p->value.cols()}},
                       {"trainable", p->trainable}});
  }
  if (!out) throw DataError("write failed: " + path.string());
  write_text(checkpoint_manifest(path),
             Json{{"format", "vidsgg-checkpoint/1"},
                  {"config", config},
                  {"tensors", tensors}}
                     .dump(2) +
                 "\n");
}

Json load_checkpoint_config(const fs::path& path) {
  const Json j = parse_file(checkpoint_manifest(path));
  return field(j, "config", checkpoint_manifest(path).filename().string());
}

void load_checkpoint(const fs::path& path, ad::ParamStore& store) {
  std::ifstream in(path, std::ios::binary);
  const std::string where = path.filename().string();
  if (!in) throw DataError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(where + ": not a checkpoint");
  }
  const auto count = get<std::uint32_t>(in, where);
  if (count != store.size()) {
    throw DataError(where + ": expected " + std::to_string(store.size()) +
                    " tensors, found " + std::to_string(count));
  }
  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(in, where);
    std::string name(len, '\0');
    in.read(name.data(), len);
    const auto rows = get<std::int64_t>(in, where);
    const auto cols = get<std::int64_t>(in, where);
    get<std::uint8_t>(in, where);
    ad::Parameter* p = store.find(name);
    if (p == nullptr) throw DataError(where + ": unknown tensor " + name);
    if (p->value.rows() != rows || p->value.cols() != cols) {
      throw DataError(where + ": shape mismatch for " + name);
    }
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!in) throw DataError(where + ": truncated checkpoint");
    seen.insert(name);
  }
}

}  // namespace vidsgg
