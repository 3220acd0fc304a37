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

#include "vidsgg/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "vidsgg/parallel.hpp"

namespace vidsgg {
namespace {

using CategoryTriplet = std::tuple<int, int, int>;

CategoryTriplet categories(const RelationTriplet& t) {
  return {t.subject.category, t.predicate, t.object.category};
}

// Hits, AP and recall for one ranked prediction list.
struct VideoScore {
  MatchOutcome match;
  double ap = 0.0;
  double r50 = 0.0;
  double r100 = 0.0;
  int hits = 0;
};

int hits_within(const std::vector<bool>& hit, std::size_t k) {
  return static_cast<int>(
      std::count(hit.begin(), hit.begin() + std::min(k, hit.size()), true));
}

VideoScore score_video(const VideoEval& v, double threshold) {
  VideoScore s;
  const auto ranked = rank_by_score(v.preds);
  s.match = greedy_match(ranked, v.gts, threshold);
  const int g = static_cast<int>(v.gts.size());
  s.hits = hits_within(s.match.hit, s.match.hit.size());
  s.ap = average_precision(s.match.hit, g);
  if (g > 0) {
    s.r50 = hits_within(s.match.hit, 50) / static_cast<double>(g);
    s.r100 = hits_within(s.match.hit, 100) / static_cast<double>(g);
  }
  return s;
}

std::array<double, 3> tag_precision(const VideoEval& v) {
  std::set<CategoryTriplet> gt_cats;
  for (const auto& t : v.gts) gt_cats.insert(categories(t));
  // Best score per unique category triplet; first appearance breaks ties.
  std::map<CategoryTriplet, std::pair<double, std::size_t>> best;
  for (std::size_t i = 0; i < v.preds.size(); ++i) {
    const auto key = categories(v.preds[i]);
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(key, std::make_pair(v.preds[i].score, i));
    } else if (v.preds[i].score > it->second.first) {
      it->second.first = v.preds[i].score;
    }
  }
  std::vector<std::tuple<double, std::size_t, CategoryTriplet>> unique;
  for (const auto& [key, val] : best) unique.emplace_back(val.first, val.second, key);
  std::sort(unique.begin(), unique.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::get<1>(a) < std::get<1>(b);
  });
  std::array<double, 3> out{};
  const std::array<int, 3> ks = {1, 5, 10};
  for (std::size_t k = 0; k < ks.size(); ++k) {
    int correct = 0;
    for (std::size_t i = 0; i < unique.size() && i < static_cast<std::size_t>(ks[k]); ++i) {
      if (gt_cats.count(std::get<2>(unique[i])) != 0) ++correct;
    }
    out[k] = correct / static_cast<double>(ks[k]);
  }
  return out;
}

double safe_mean(double total, int count) {
  return count > 0 ? total / count : 0.0;
}

}  // namespace

double viou(const Tracklet& a, const Tracklet& b) {
  double area_a = 0.0, area_b = 0.0, inter = 0.0;
  for (const Box& box : a.boxes) area_a += box_area(box);
  for (const Box& box : b.boxes) area_b += box_area(box);
  if (const auto overlap = intersect(a.frames(), b.frames())) {
    for (int f = overlap->begin; f < overlap->end; ++f) {
      inter += box_intersection(a.boxes[f - a.begin_frame],
                                b.boxes[f - b.begin_frame]);
    }
  }
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<RelationTriplet> rank_by_score(std::span<const RelationTriplet> preds) {
  std::vector<RelationTriplet> out(preds.begin(), preds.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const RelationTriplet& a, const RelationTriplet& b) {
                     return a.score > b.score;
                   });
  return out;
}

MatchOutcome greedy_match(std::span<const RelationTriplet> ranked_preds,
                          std::span<const RelationTriplet> gts,
                          double threshold) {
  MatchOutcome m;
  m.hit.assign(ranked_preds.size(), false);
  m.gt_of_pred.assign(ranked_preds.size(), -1);
  m.pred_of_gt.assign(gts.size(), -1);
  for (std::size_t p = 0; p < ranked_preds.size(); ++p) {
    const RelationTriplet& pred = ranked_preds[p];
    const auto key = categories(pred);
    int best = -1;
    double best_ov = threshold;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (m.pred_of_gt[g] >= 0 || categories(gts[g]) != key) continue;
      const double ov = std::min(viou(pred.subject, gts[g].subject),
                                 viou(pred.object, gts[g].object));
      if (ov >= best_ov && (best < 0 || ov > best_ov)) {
        best = static_cast<int>(g);
        best_ov = ov;
      }
    }
    if (best >= 0) {
      m.hit[p] = true;
      m.gt_of_pred[p] = best;
      m.pred_of_gt[best] = static_cast<int>(p);
    }
  }
  return m;
}

double average_precision(const std::vector<bool>& ranked_hits, int gt_count) {
  if (gt_count <= 0) return 0.0;
  double total = 0.0;
  int hits = 0;
  for (std::size_t r = 0; r < ranked_hits.size(); ++r) {
    if (!ranked_hits[r]) continue;
    ++hits;
    total += hits / static_cast<double>(r + 1);
  }
  return total / gt_count;
}

RelDetMetrics reldet(std::span<const VideoEval> videos, double threshold) {
  RelDetMetrics out;
  int counted = 0;
  for (const VideoEval& v : videos) {
    if (v.gts.empty()) continue;
    const VideoScore s = score_video(v, threshold);
    out.mean_ap += s.ap;
    out.recall_50 += s.r50;
    out.recall_100 += s.r100;
    ++counted;
  }
  out.mean_ap = safe_mean(out.mean_ap, counted);
  out.recall_50 = safe_mean(out.recall_50, counted);
  out.recall_100 = safe_mean(out.recall_100, counted);
  return out;
}

RelTagMetrics reltag(std::span<const VideoEval> videos) {
  RelTagMetrics out;
  int counted = 0;
  for (const VideoEval& v : videos) {
    if (v.gts.empty()) continue;
    const auto p = tag_precision(v);
    out.precision_1 += p[0];
    out.precision_5 += p[1];
    out.precision_10 += p[2];
    ++counted;
  }
  out.precision_1 = safe_mean(out.precision_1, counted);
  out.precision_5 = safe_mean(out.precision_5, counted);
  out.precision_10 = safe_mean(out.precision_10, counted);
  return out;
}

FractionRecallMetrics fraction_recall(std::span<const VideoEval> videos,
                                      double threshold) {
  FractionRecallMetrics out;
  std::array<double, 3> single_total{}, multi_total{};
  for (const VideoEval& v : videos) {
    if (v.gts.empty()) continue;
    const auto ranked = rank_by_score(v.preds);
    const MatchOutcome m = greedy_match(ranked, v.gts, threshold);
    // Sample = GT instances sharing (subject tracklet, object tracklet,
    // predicate).
    std::map<CategoryTriplet, std::vector<int>> samples;
    for (std::size_t g = 0; g < v.gts.size(); ++g) {
      const auto& t = v.gts[g];
      samples[{t.subject.id, t.predicate, t.object.id}].push_back(static_cast<int>(g));
    }
    for (const auto& [key, members] : samples) {
      const bool multi = members.size() >= 2;
      (multi ? out.multi_samples : out.single_samples) += 1;
      for (std::size_t k = 0; k < out.ks.size(); ++k) {
        int hit = 0;
        for (int g : members) {
          if (m.pred_of_gt[g] >= 0 && m.pred_of_gt[g] < out.ks[k]) ++hit;
        }
        const double fr = hit / static_cast<double>(members.size());
        (multi ? multi_total : single_total)[k] += fr;
      }
    }
  }
  for (std::size_t k = 0; k < out.ks.size(); ++k) {
    out.single[k] = safe_mean(single_total[k], out.single_samples);
    out.multi[k] = safe_mean(multi_total[k], out.multi_samples);
  }
  return out;
}

EvalReport evaluate(std::span<const VideoEval> videos, double threshold,
                    int threads) {
  EvalReport report;
  report.per_video.resize(videos.size());
  parallel_for(videos.size(), threads, [&](std::size_t i) {
    const VideoEval& v = videos[i];
    const VideoScore s = score_video(v, threshold);
    const auto p = tag_precision(v);
    VideoMetrics& row = report.per_video[i];
    row.video_id = v.video_id;
    row.gt_count = static_cast<int>(v.gts.size());
    row.pred_count = static_cast<int>(v.preds.size());
    row.hit_count = s.hits;
    row.average_precision = s.ap;
    row.recall_50 = s.r50;
    row.recall_100 = s.r100;
    row.precision_1 = p[0];
    row.precision_5 = p[1];
    row.precision_10 = p[2];
  });
  int counted = 0;
  for (const VideoMetrics& row : report.per_video) {
    report.gt_count += row.gt_count;
    report.pred_count += row.pred_count;
    report.hit_count += row.hit_count;
    if (row.gt_count == 0) continue;
    ++counted;
    report.reldet.mean_ap += row.average_precision;
    report.reldet.recall_50 += row.recall_50;
    report.reldet.recall_100 += row.recall_100;
    report.reltag.precision_1 += row.precision_1;
    report.reltag.precision_5 += row.precision_5;
    report.reltag.precision_10 += row.precision_10;
  }
  report.videos = counted;
  report.reldet.mean_ap = safe_mean(report.reldet.mean_ap, counted);
  report.reldet.recall_50 = safe_mean(report.reldet.recall_50, counted);
  report.reldet.recall_100 = safe_mean(report.reldet.recall_100, counted);
  report.reltag.precision_1 = safe_mean(report.reltag.precision_1, counted);
  report.reltag.precision_5 = safe_mean(report.reltag.precision_5, counted);
  report.reltag.precision_10 = safe_mean(report.reltag.precision_10, counted);
  report.fraction = fraction_recall(videos, threshold);
  return report;
}

std::string EvalReport::to_json(int indent) const {
  nlohmann::ordered_json j;
  j["videos"] = videos;
  j["gt_count"] = gt_count;
  j["pred_count"] = pred_count;
  j["hit_count"] = hit_count;
  j["reldet"] = {{"mAP", reldet.mean_ap},
                 {"R@50", reldet.recall_50},
                 {"R@100", reldet.recall_100}};
  j["reltag"] = {{"P@1", reltag.precision_1},
                 {"P@5", reltag.precision_5},
                 {"P@10", reltag.precision_10}};
  nlohmann::ordered_json fr;
  for (std::size_t k = 0; k < fraction.ks.size(); ++k) {
    fr["fR_S@" + std::to_string(fraction.ks[k])] = fraction.single[k];
  }
  for (std::size_t k = 0; k < fraction.ks.size(); ++k) {
    fr["fR_M@" + std::to_string(fraction.ks[k])] = fraction.multi[k];
  }
  fr["single_samples"] = fraction.single_samples;
  fr["multi_samples"] = fraction.multi_samples;
  j["fraction_recall"] = fr;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const VideoMetrics& v : per_video) {
    rows.push_back({{"video_id", v.video_id},
                    {"gt", v.gt_count},
                    {"predictions", v.pred_count},
                    {"hits", v.hit_count},
                    {"AP", v.average_precision},
                    {"R@50", v.recall_50},
                    {"R@100", v.recall_100},
                    {"P@1", v.precision_1},
                    {"P@5", v.precision_5},
                    {"P@10", v.precision_10}});
  }
  j["per_video"] = rows;
  return j.dump(indent);
}

std::string EvalReport::to_table() const {
  char buf[512];
  std::ostringstream os;
  os << "+--------+--------+--------+--------+--------+--------+\n"
     << "|           RelDet          |           RelTag         |\n"
     << "|  mAP   |  R@50  | R@100  |  P@1   |  P@5   |  P@10  |\n"
     << "+--------+--------+--------+--------+--------+--------+\n";
  std::snprintf(buf, sizeof(buf),
                "| %6.2f | %6.2f | %6.2f | %6.2f | %6.2f | %6.2f |\n",
                100 * reldet.mean_ap, 100 * reldet.recall_50,
                100 * reldet.recall_100, 100 * reltag.precision_1,
                100 * reltag.precision_5, 100 * reltag.precision_10);
  os << buf << "+--------+--------+--------+--------+--------+--------+\n\n";
  os << "+--------+--------+--------+--------+--------+--------+\n"
     << "|         fR_S@K (%)        |        fR_M@K (%)        |\n"
     << "|   50   |  100   |  150   |   50   |  100   |  150   |\n"
     << "+--------+--------+--------+--------+--------+--------+\n";
  std::snprintf(buf, sizeof(buf),
                "| %6.2f | %6.2f | %6.2f | %6.2f | %6.2f | %6.2f |\n",
                100 * fraction.single[0], 100 * fraction.single[1],
                100 * fraction.single[2], 100 * fraction.multi[0],
                100 * fraction.multi[1], 100 * fraction.multi[2]);
  os << buf << "+--------+--------+--------+--------+--------+--------+\n";
  std::snprintf(buf, sizeof(buf),
                "videos=%d gt=%d predictions=%d hits=%d samples(single=%d, "
                "multi=%d)\n",
                videos, gt_count, pred_count, hit_count,
                fraction.single_samples, fraction.multi_samples);
  os << buf;
  return os.str();
}

std::string EvalReport::per_video_csv() const {
  std::ostringstream os;
  os << "video_id,gt,predictions,hits,AP,R@50,R@100,P@1,P@5,P@10\n";
  char buf[256];
  for (const VideoMetrics& v : per_video) {
    std::snprintf(buf, sizeof(buf), ",%d,%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  v.gt_count, v.pred_count, v.hit_count, v.average_precision,
                  v.recall_50, v.recall_100, v.precision_1, v.precision_5,
                  v.precision_10);
    os << v.video_id << buf;
  }
  return os.str();
}

}  // namespace vidsgg
