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

#include "vidsgg/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "vidsgg/errors.hpp"
#include "vidsgg/evaluation.hpp"

namespace vidsgg {

std::vector<int> assign_gt_entities(std::span<const Tracklet> detected,
                                    std::span<const Tracklet> gt,
                                    double threshold) {
  struct Pair {
    double viou;
    int det;
    int gt;
  };
  std::vector<Pair> pairs;
  for (std::size_t d = 0; d < detected.size(); ++d) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (detected[d].category != gt[g].category) continue;
      const double v = viou(detected[d], gt[g]);
      if (v >= threshold) {
        pairs.push_back({v, static_cast<int>(d), static_cast<int>(g)});
      }
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return a.viou > b.viou;
  });
  std::vector<int> map(detected.size(), -1);
  std::vector<bool> claimed(gt.size(), false);
  for (const Pair& p : pairs) {
    if (map[p.det] >= 0 || claimed[p.gt]) continue;
    map[p.det] = p.gt;
    claimed[p.gt] = true;
  }
  return map;
}

GtAssignment build_gt_assignment(const TemporalBipartiteGraph& gt,
                                 std::span<const Tracklet> detected, int m) {
  GtAssignment out;
  out.entity_map = assign_gt_entities(detected, gt.entities);
  const Eigen::Index n = static_cast<Eigen::Index>(detected.size());
  out.categories.assign(m, kBackground);
  out.adjacency.assign(m, Matrix::Zero(2, n));
  int slot = 0;
  for (const PredicateNode& p : gt.predicates) {
    if (slot >= m) {
      ++out.dropped;
      continue;
    }
    out.categories[slot] = p.category;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (out.entity_map[i] == p.subject) out.adjacency[slot](0, i) = 1.0;
      if (out.entity_map[i] == p.object) out.adjacency[slot](1, i) = 1.0;
    }
    ++slot;
  }
  return out;
}

std::vector<int> hungarian(const Matrix& cost) {
  if (cost.rows() != cost.cols()) {
    throw InvalidInput("hungarian: cost matrix must be square, got " +
                       std::to_string(cost.rows()) + "x" +
                       std::to_string(cost.cols()));
  }
  if (!cost.allFinite()) throw InvalidInput("hungarian: non-finite cost");
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Shortest augmenting path with row/column potentials, 1-based with a
  // virtual column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> row_of_col(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = row_of_col[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const int j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= n; ++j) col_of_row[row_of_col[j] - 1] = j - 1;
  return col_of_row;
}

double assignment_cost(const Matrix& cost, const std::vector<int>& col_of_row) {
  double total = 0.0;
  for (std::size_t r = 0; r < col_of_row.size(); ++r) {
    total += cost(static_cast<Eigen::Index>(r), col_of_row[r]);
  }
  return total;
}

double match_cost(int gt_category, const Matrix& gt_adjacency,
                  const RowVector& probs, const Matrix& pred_adjacency,
                  double lambda_att) {
  if (gt_category == kBackground) return 0.0;
  if (gt_category < 0 || gt_category >= probs.size()) {
    throw InvalidInput("match_cost: category out of range");
  }
  if (gt_adjacency.rows() != pred_adjacency.rows() ||
      gt_adjacency.cols() != pred_adjacency.cols()) {
    throw InvalidInput("match_cost: adjacency shape mismatch");
  }
  const double cls = -std::log(std::max(probs(gt_category), kLogClamp));
  double bce = 0.0;
  for (Eigen::Index i = 0; i < gt_adjacency.size(); ++i) {
    const double y = gt_adjacency.data()[i];
    const double p = pred_adjacency.data()[i];
    bce -= y * std::log(std::max(p, kLogClamp)) +
           (1.0 - y) * std::log(std::max(1.0 - p, kLogClamp));
  }
  if (gt_adjacency.size() > 0) bce /= static_cast<double>(gt_adjacency.size());
  return cls + lambda_att * bce;
}

StageLoss stage_loss(const ad::Var& probs, const ad::Var& subject_attn,
                     const ad::Var& object_attn, const GtAssignment& targets,
                     double lambda_att,
                     const std::optional<std::vector<int>>& fixed_match) {
  const Matrix& pv = probs.value();
  const Eigen::Index m = pv.rows();
  const Eigen::Index classes = pv.cols();
  const Eigen::Index background = classes - 1;
  const Eigen::Index n = subject_attn.cols();
  if (static_cast<Eigen::Index>(targets.categories.size()) != m) {
    throw InvalidInput("stage_loss: targets must be padded to m entries");
  }

  auto pred_adj = [&](Eigen::Index q) {
    Matrix a(2, n);
    a.row(0) = subject_attn.value().row(q);
    a.row(1) = object_attn.value().row(q);
    return a;
  };

  StageLoss out;
  std::vector<int> perm;
  if (fixed_match) {
    perm = *fixed_match;
  } else {
    Matrix cost(m, m);
    for (Eigen::Index g = 0; g < m; ++g) {
      for (Eigen::Index q = 0; q < m; ++q) {
        cost(g, q) = match_cost(targets.categories[g], targets.adjacency[g],
                                pv.row(q), pred_adj(q), lambda_att);
      }
    }
    perm = hungarian(cost);
  }
  out.match.prediction_of_gt = perm;
  out.match.pair_cost.resize(perm.size());
  for (Eigen::Index g = 0; g < m; ++g) {
    out.match.pair_cost[g] =
        match_cost(targets.categories[g], targets.adjacency[g],
                   pv.row(perm[g]), pred_adj(perm[g]), lambda_att);
  }

  // Classification terms: one-hot mask over (query, class), background for
  // padded ground truth.
  Matrix mask = Matrix::Zero(m, classes);
  std::vector<int> matched_queries;
  for (Eigen::Index g = 0; g < m; ++g) {
    const int c = targets.categories[g];
    mask(perm[g], c == kBackground ? background : c) = 1.0;
    if (c != kBackground) matched_queries.push_back(perm[g]);
  }
  ad::Var loss = ad::scale(
      ad::sum(ad::mul_const(ad::log_clamped(probs, kLogClamp), mask)), -1.0);

  if (!matched_queries.empty() && n > 0) {
    const Eigen::Index r = static_cast<Eigen::Index>(matched_queries.size());
    Matrix target(2 * r, n);
    Eigen::Index row = 0;
    for (Eigen::Index g = 0; g < m; ++g) {
      if (targets.categories[g] == kBackground) continue;
      target.row(row) = targets.adjacency[g].row(0);
      target.row(r + row) = targets.adjacency[g].row(1);
      ++row;
    }
    const ad::Var predicted =
        ad::concat_rows({ad::gather_rows(subject_attn, matched_queries),
                         ad::gather_rows(object_attn, matched_queries)});
    // bce() averages over all 2rn entries; scaling by r gives the sum of the
    // per-node means.
    const ad::Var att = ad::bce(predicted, target, kLogClamp);
    loss = ad::add(loss, ad::scale(att, lambda_att * static_cast<double>(r)));
  }
  out.loss = loss;
  return out;
}

}  // namespace vidsgg
