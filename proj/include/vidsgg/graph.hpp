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

// Temporal bipartite scene graphs: entity nodes (tracklets), predicate nodes
// carrying one or more time slots, and subject/object role edges.

#ifndef VIDSGG_GRAPH_HPP_
#define VIDSGG_GRAPH_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vidsgg {

// Half-open frame interval [begin, end).
struct FrameRange {
  int begin = 0;
  int end = 0;
  int length() const { return end - begin; }
  bool operator==(const FrameRange&) const = default;
};

// Time normalised to [0,1] w.r.t. video length; 0 <= start < end <= 1.
struct TimeSlot {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  double center() const { return 0.5 * (start + end); }
  bool valid() const { return 0.0 <= start && start < end && end <= 1.0; }

  static TimeSlot from_frames(FrameRange frames, int frame_count);
  bool operator==(const TimeSlot&) const = default;
};

// Rounds a normalised slot to the nearest frame boundaries; never empty.
FrameRange to_frames(TimeSlot slot, int frame_count);

std::optional<TimeSlot> intersect(TimeSlot a, TimeSlot b);
std::optional<FrameRange> intersect(FrameRange a, FrameRange b);
double temporal_iou(TimeSlot a, TimeSlot b);

// (xmin, ymin, xmax, ymax), normalised to the frame size.
using Box = std::array<double, 4>;

inline double box_area(const Box& b) {
  return (b[2] - b[0]) * (b[3] - b[1]);
}
double box_intersection(const Box& a, const Box& b);

struct Tracklet {
  int id = 0;
  int category = 0;
  int begin_frame = 0;
  std::vector<Box> boxes;  // one per frame starting at begin_frame

  int length() const { return static_cast<int>(boxes.size()); }
  int end_frame() const { return begin_frame + length(); }
  FrameRange frames() const { return {begin_frame, end_frame()}; }
  TimeSlot slot(int frame_count) const {
    return TimeSlot::from_frames(frames(), frame_count);
  }
  // Restricts to the frames inside `range`; empty result if disjoint.
  Tracklet crop(FrameRange range) const;

  bool operator==(const Tracklet&) const = default;
};

enum class Role { kSubject = 0, kObject = 1 };

struct PredicateNode {
  int category = 0;
  std::vector<TimeSlot> time_slots;  // K_j instances
  std::vector<double> slot_scores;   // parallel to time_slots
  int subject = 0;                   // entity index
  int object = 0;                    // entity index

  int instance_count() const { return static_cast<int>(time_slots.size()); }
  // Node-level confidence: the best instance score.
  double score() const;
};

struct TemporalBipartiteGraph {
  int frame_count = 0;
  std::vector<Tracklet> entities;
  std::vector<PredicateNode> predicates;
};

// Flat relation instance; tracklets are cropped to the slot.
struct RelationTriplet {
  Tracklet subject;
  int predicate = 0;
  Tracklet object;
  TimeSlot slot;
  double score = 1.0;

  bool operator==(const RelationTriplet&) const = default;
};

struct Violation {
  std::string code;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(const std::string& code) const;
};

// Violation codes: "bad-frame-count", "empty-tracklet", "tracklet-out-of-video",
// "bad-box", "bad-category", "duplicate-entity-id", "no-instances",
// "score-mismatch", "bad-score", "entity-index", "self-relation", "bad-slot",
// "slot-outside-overlap".
ValidationReport validate_graph(const TemporalBipartiteGraph& g);

// Expands every predicate node into K_j triplets ordered by descending score,
// ties by predicate index then slot index. Throws InvalidInput on an invalid
// graph.
std::vector<RelationTriplet> to_triplets(const TemporalBipartiteGraph& g);

// Groups triplets sharing (subject id, predicate, object id) into one node.
// Throws InvalidInput if a triplet references a tracklet id not in
// `entities`.
TemporalBipartiteGraph from_triplets(std::span<const RelationTriplet> triplets,
                                     std::vector<Tracklet> entities,
                                     int frame_count);

}  // namespace vidsgg

#endif  // VIDSGG_GRAPH_HPP_
