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

#include "vidsgg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "vidsgg/errors.hpp"

namespace vidsgg {
namespace {

constexpr double kSlotTolerance = 1e-9;

std::string slot_str(TimeSlot s) {
  return "(" + std::to_string(s.start) + ", " + std::to_string(s.end) + ")";
}

}  // namespace

TimeSlot TimeSlot::from_frames(FrameRange frames, int frame_count) {
  const double t = static_cast<double>(frame_count);
  return {frames.begin / t, frames.end / t};
}

FrameRange to_frames(TimeSlot slot, int frame_count) {
  int begin = static_cast<int>(std::lround(slot.start * frame_count));
  int end = static_cast<int>(std::lround(slot.end * frame_count));
  begin = std::clamp(begin, 0, frame_count);
  end = std::clamp(end, 0, frame_count);
  if (end <= begin) {
    end = std::min(frame_count, begin + 1);
    begin = end - 1;
  }
  return {begin, end};
}

std::optional<TimeSlot> intersect(TimeSlot a, TimeSlot b) {
  const TimeSlot r{std::max(a.start, b.start), std::min(a.end, b.end)};
  if (r.end <= r.start) return std::nullopt;
  return r;
}

std::optional<FrameRange> intersect(FrameRange a, FrameRange b) {
  const FrameRange r{std::max(a.begin, b.begin), std::min(a.end, b.end)};
  if (r.end <= r.begin) return std::nullopt;
  return r;
}

double temporal_iou(TimeSlot a, TimeSlot b) {
  const double inter =
      std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const double uni = a.length() + b.length() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double box_intersection(const Box& a, const Box& b) {
  const double w = std::min(a[2], b[2]) - std::max(a[0], b[0]);
  const double h = std::min(a[3], b[3]) - std::max(a[1], b[1]);
  return (w > 0 && h > 0) ? w * h : 0.0;
}

Tracklet Tracklet::crop(FrameRange range) const {
  Tracklet out;
  out.id = id;
  out.category = category;
  const auto overlap = intersect(frames(), range);
  if (!overlap) {
    out.begin_frame = range.begin;
    return out;
  }
  out.begin_frame = overlap->begin;
  out.boxes.assign(boxes.begin() + (overlap->begin - begin_frame),
                   boxes.begin() + (overlap->end - begin_frame));
  return out;
}

double PredicateNode::score() const {
  if (slot_scores.empty()) return 0.0;
  return *std::max_element(slot_scores.begin(), slot_scores.end());
}

bool ValidationReport::has(const std::string& code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

ValidationReport validate_graph(const TemporalBipartiteGraph& g) {
  ValidationReport report;
  auto flag = [&](std::string code, std::string detail) {
    report.violations.push_back({std::move(code), std::move(detail)});
  };
  const int n = static_cast<int>(g.entities.size());
  if (g.frame_count <= 0 && (n > 0 || !g.predicates.empty())) {
    flag("bad-frame-count", "frame_count must be positive");
  }

  std::set<int> ids;
  for (int i = 0; i < n; ++i) {
    const Tracklet& e = g.entities[i];
    const std::string where = "entity " + std::to_string(i);
    if (!ids.insert(e.id).second) {
      flag("duplicate-entity-id", where + " repeats id " + std::to_string(e.id));
    }
    if (e.category < 0) flag("bad-category", where);
    if (e.boxes.empty()) {
      flag("empty-tracklet", where);
      continue;
    }
    if (e.begin_frame < 0 || e.end_frame() > g.frame_count) {
      flag("tracklet-out-of-video", where);
    }
    for (std::size_t f = 0; f < e.boxes.size(); ++f) {
      const Box& b = e.boxes[f];
      const bool finite = std::all_of(b.begin(), b.end(),
                                      [](double v) { return std::isfinite(v); });
      if (!finite || !(b[0] < b[2]) || !(b[1] < b[3]) || b[0] < 0.0 ||
          b[1] < 0.0 || b[2] > 1.0 || b[3] > 1.0) {
        flag("bad-box", where + " frame " + std::to_string(f));
        break;
      }
    }
  }

  for (std::size_t j = 0; j < g.predicates.size(); ++j) {
    const PredicateNode& p = g.predicates[j];
    const std::string where = "predicate " + std::to_string(j);
    if (p.category < 0) flag("bad-category", where);
    if (p.time_slots.empty()) flag("no-instances", where);
    if (p.slot_scores.size() != p.time_slots.size()) {
      flag("score-mismatch", where);
    }
    for (double s : p.slot_scores) {
      if (!(s >= 0.0 && s <= 1.0)) {
        flag("bad-score", where);
        break;
      }
    }
    const bool sub_ok = p.subject >= 0 && p.subject < n;
    const bool obj_ok = p.object >= 0 && p.object < n;
    if (!sub_ok || !obj_ok) {
      flag("entity-index", where);
      continue;
    }
    if (p.subject == p.object) flag("self-relation", where);
    const Tracklet& s = g.entities[p.subject];
    const Tracklet& o = g.entities[p.object];
    std::optional<TimeSlot> overlap;
    if (!s.boxes.empty() && !o.boxes.empty() && g.frame_count > 0) {
      overlap = intersect(s.slot(g.frame_count), o.slot(g.frame_count));
    }
    for (const TimeSlot& slot : p.time_slots) {
      if (!slot.valid()) {
        flag("bad-slot", where + " " + slot_str(slot));
        continue;
      }
      if (!overlap || slot.start < overlap->start - kSlotTolerance ||
          slot.end > overlap->end + kSlotTolerance) {
        flag("slot-outside-overlap", where + " " + slot_str(slot));
      }
    }
  }
  return report;
}

std::vector<RelationTriplet> to_triplets(const TemporalBipartiteGraph& g) {
  const ValidationReport report = validate_graph(g);
  if (!report.ok()) {
    throw InvalidInput("to_triplets: invalid graph (" +
                       report.violations.front().code + ": " +
                       report.violations.front().detail + ")");
  }
  struct Keyed {
    RelationTriplet triplet;
    std::size_t node;
    std::size_t slot;
  };
  std::vector<Keyed> out;
  for (std::size_t j = 0; j < g.predicates.size(); ++j) {
    const PredicateNode& p = g.predicates[j];
    for (std::size_t k = 0; k < p.time_slots.size(); ++k) {
      const FrameRange frames = to_frames(p.time_slots[k], g.frame_count);
      RelationTriplet t;
      t.subject = g.entities[p.subject].crop(frames);
      t.object = g.entities[p.object].crop(frames);
      t.predicate = p.category;
      t.slot = p.time_slots[k];
      t.score = p.slot_scores[k];
      out.push_back({std::move(t), j, k});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Keyed& a, const Keyed& b) {
    if (a.triplet.score != b.triplet.score) return a.triplet.score > b.triplet.score;
    return std::tie(a.node, a.slot) < std::tie(b.node, b.slot);
  });
  std::vector<RelationTriplet> triplets;
  triplets.reserve(out.size());
  for (auto& k : out) triplets.push_back(std::move(k.triplet));
  return triplets;
}

TemporalBipartiteGraph from_triplets(std::span<const RelationTriplet> triplets,
                                     std::vector<Tracklet> entities,
                                     int frame_count) {
  std::map<int, int> index_of;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    index_of.emplace(entities[i].id, static_cast<int>(i));
  }
  TemporalBipartiteGraph g;
  g.frame_count = frame_count;
  g.entities = std::move(entities);
  std::map<std::tuple<int, int, int>, std::size_t> node_of;
  for (std::size_t t = 0; t < triplets.size(); ++t) {
    const RelationTriplet& r = triplets[t];
    const auto s = index_of.find(r.subject.id);
    const auto o = index_of.find(r.object.id);
    if (s == index_of.end() || o == index_of.end()) {
      throw InvalidInput("from_triplets: triplet " + std::to_string(t) +
                         " references unknown tracklet id " +
                         std::to_string(s == index_of.end() ? r.subject.id
                                                            : r.object.id));
    }
    const auto key = std::make_tuple(r.subject.id, r.predicate, r.object.id);
    auto it = node_of.find(key);
    if (it == node_of.end()) {
      PredicateNode p;
      p.category = r.predicate;
      p.subject = s->second;
      p.object = o->second;
      it = node_of.emplace(key, g.predicates.size()).first;
      g.predicates.push_back(std::move(p));
    }
    PredicateNode& p = g.predicates[it->second];
    p.time_slots.push_back(r.slot);
    p.slot_scores.push_back(r.score);
  }
  return g;
}

}  // namespace vidsgg
