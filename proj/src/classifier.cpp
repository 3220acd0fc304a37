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

#include "vidsgg/classifier.hpp"

#include <cmath>
#include <map>
#include <tuple>

#include "vidsgg/errors.hpp"

namespace vidsgg {
namespace {

Matrix softmax_rows_value(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double mx = a.row(r).maxCoeff();
    out.row(r) = (a.row(r).array() - mx).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Matrix sigmoid_value(const Matrix& a) {
  return a.unaryExpr([](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
}

}  // namespace

ClassifierConfig ClassifierConfig::desk() {
  ClassifierConfig c;
  c.queries = 16;
  c.model_dim = 64;
  c.query_dim = 64;
  c.heads = 4;
  c.encoder_layers = 1;
  c.decoder_layers = 2;
  c.mlp_hidden = 64;
  c.word_dim = 32;
  c.features.model_dim = 64;
  c.features.hidden = 64;
  c.features.appearance_dim = 64;
  return c;
}

void ClassifierConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw InvalidInput("classifier config: " + what);
  };
  if (entity_categories < 1 || predicate_categories < 1) fail("category counts");
  if (queries < 1) fail("queries must be >= 1");
  if (encoder_layers < 1 || decoder_layers < 1) fail("layer counts must be >= 1");
  if (heads < 1 || model_dim % heads != 0 || query_dim % heads != 0) {
    fail("heads must divide model_dim and query_dim");
  }
  if (mlp_hidden < 1 || word_dim < 1) fail("dimensions");
  if (features.model_dim != model_dim) fail("features.model_dim != model_dim");
  if (features.pool_len < 1 || features.conv_kernel < 1) fail("features");
}

AttentionTensor double_softmax(const Matrix& a1, const Matrix& a2) {
  if (a1.rows() != a2.rows() || a1.cols() != a2.cols()) {
    throw InvalidInput("double_softmax: channel shape mismatch");
  }
  AttentionTensor t;
  t.entity_factor[0] = softmax_rows_value(a1);
  t.entity_factor[1] = softmax_rows_value(a2);
  t.role_factor[0] = sigmoid_value(a1 - a2);
  t.role_factor[1] = sigmoid_value(a2 - a1);
  for (int r = 0; r < 2; ++r) {
    t.values[r] = t.entity_factor[r].cwiseProduct(t.role_factor[r]);
  }
  return t;
}

std::pair<ad::Var, ad::Var> double_softmax(const ad::Var& a1,
                                           const ad::Var& a2) {
  const ad::Var e1 = ad::softmax_rows(a1);
  const ad::Var e2 = ad::softmax_rows(a2);
  const ad::Var r1 = ad::sigmoid(ad::sub(a1, a2));
  const ad::Var r2 = ad::sigmoid(ad::sub(a2, a1));
  return {ad::mul(e1, r1), ad::mul(e2, r2)};
}

std::vector<std::pair<int, int>> select_edges(const Matrix& subject_attn,
                                              const Matrix& object_attn) {
  if (subject_attn.rows() != object_attn.rows() ||
      subject_attn.cols() != object_attn.cols() || subject_attn.cols() < 1) {
    throw InvalidInput("select_edges: bad attention shape");
  }
  auto argmax = [](const auto& row) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < row.size(); ++i) {
      if (row(i) > row(best)) best = i;
    }
    return static_cast<int>(best);
  };
  std::vector<std::pair<int, int>> edges;
  edges.reserve(subject_attn.rows());
  for (Eigen::Index j = 0; j < subject_attn.rows(); ++j) {
    edges.emplace_back(argmax(subject_attn.row(j)), argmax(object_attn.row(j)));
  }
  return edges;
}

RowVector predicate_probabilities(const RowVector& mlp_logits,
                                  const RowVector& prior_row) {
  if (mlp_logits.size() != prior_row.size() || mlp_logits.size() == 0) {
    throw InvalidInput("predicate_probabilities: length mismatch");
  }
  Matrix z = mlp_logits + prior_row;
  return softmax_rows_value(z).row(0);
}

Matrix build_prior(std::span<const TemporalBipartiteGraph> graphs,
                   int entity_categories, int predicate_categories,
                   double eps) {
  if (graphs.empty()) throw InvalidInput("build_prior: no training graphs");
  const int ne = entity_categories;
  const int np = predicate_categories;
  Matrix counts = Matrix::Zero(static_cast<Eigen::Index>(ne) * ne, np);
  for (const auto& g : graphs) {
    for (const auto& p : g.predicates) {
      const int s = g.entities.at(p.subject).category;
      const int o = g.entities.at(p.object).category;
      if (s < 0 || s >= ne || o < 0 || o >= ne || p.category < 0 ||
          p.category >= np) {
        throw InvalidInput("build_prior: category out of range");
      }
      counts(s * ne + o, p.category) += 1.0;
    }
  }
  Matrix prior(counts.rows(), np);
  for (Eigen::Index r = 0; r < counts.rows(); ++r) {
    const double pair = counts.row(r).sum();
    for (int p = 0; p < np; ++p) {
      prior(r, p) = std::log((counts(r, p) + eps) / (pair + eps * np));
    }
  }
  return prior;
}

Matrix random_unit_embeddings(int count, int dim, std::uint64_t seed) {
  Rng rng(seed);
  Matrix table = gaussian(rng, count, dim, 1.0);
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    const double norm = table.row(r).norm();
    if (norm > 0) table.row(r) /= norm;
  }
  return table;
}

// ---- RaCA ------------------------------------------------------------------

Raca::Raca(ad::ParamStore& store, const std::string& name, int query_dim,
           int model_dim, int hidden, Rng& rng)
    : model_dim_(model_dim) {
  for (int r = 0; r < 2; ++r) {
    const std::string role = r == 0 ? ".subject" : ".object";
    wq_[r] = nn::Linear(store, name + role + ".wq", query_dim, model_dim, rng,
                        false);
    wk_[r] = nn::Linear(store, name + role + ".wk", model_dim, model_dim, rng,
                        false);
  }
  f_s_ = nn::Mlp(store, name + ".f_s", model_dim, hidden, query_dim, rng);
  f_o_ = nn::Mlp(store, name + ".f_o", model_dim, hidden, query_dim, rng);
}

Raca::Output Raca::operator()(ad::Tape& tape, const ad::Var& queries,
                              const ad::Var& entities) const {
  const double scale = 1.0 / std::sqrt(static_cast<double>(model_dim_));
  ad::Var logits[2];
  for (int r = 0; r < 2; ++r) {
    logits[r] = ad::scale(
        ad::matmul_nt(wq_[r](tape, queries), wk_[r](tape, entities)), scale);
  }
  auto [att1, att2] = double_softmax(logits[0], logits[1]);
  Output out;
  out.subject_attn = att1;
  out.object_attn = att2;
  out.fused = ad::add(f_s_(tape, ad::matmul(att1, entities)),
                      f_o_(tape, ad::matmul(att2, entities)));
  return out;
}

DecoderLayer::DecoderLayer(ad::ParamStore& store, const std::string& name,
                           const ClassifierConfig& cfg, Rng& rng)
    : self_attn_(store, name + ".self_attn", cfg.query_dim, cfg.query_dim,
                 cfg.query_dim, cfg.heads, rng),
      norm1_(store, name + ".norm1", cfg.query_dim),
      raca_(store, name + ".raca", cfg.query_dim, cfg.model_dim,
            cfg.mlp_hidden, rng),
      norm2_(store, name + ".norm2", cfg.query_dim),
      ffn_(store, name + ".ffn", cfg.query_dim, cfg.mlp_hidden, cfg.query_dim,
           rng),
      norm3_(store, name + ".norm3", cfg.query_dim) {}

Raca::Output DecoderLayer::operator()(ad::Tape& tape, const ad::Var& queries,
                                      const ad::Var& entities) const {
  const ad::Var q1 =
      norm1_(tape, ad::add(queries, self_attn_.self(tape, queries)));
  Raca::Output r = raca_(tape, q1, entities);
  const ad::Var q2 = norm2_(tape, ad::add(q1, r.fused));
  r.fused = norm3_(tape, ad::add(q2, ffn_(tape, q2)));
  return r;
}

// ---- Classifier --------------------------------------------------------------

Classifier::Classifier(const ClassifierConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(cfg_.seed);
  tracklet_encoder_ =
      TrackletEncoder(store_, "cls.tracklet", cfg_.features, rng);
  for (int i = 0; i < cfg_.encoder_layers; ++i) {
    encoder_.emplace_back(store_, "cls.encoder." + std::to_string(i),
                          cfg_.model_dim, cfg_.heads, cfg_.mlp_hidden, rng);
  }
  for (int i = 0; i < cfg_.decoder_layers; ++i) {
    decoder_.emplace_back(store_, "cls.decoder." + std::to_string(i), cfg_,
                          rng);
  }
  queries_ = &store_.add("cls.queries",
                         gaussian(rng, cfg_.queries, cfg_.query_dim, 1.0));
  entity_embedding_ = &store_.add(
      "cls.entity_embedding",
      random_unit_embeddings(cfg_.entity_categories, cfg_.word_dim,
                             cfg_.seed ^ 0x9e3779b97f4a7c15ULL),
      false);
  prior_ = &store_.add(
      "cls.prior",
      Matrix::Zero(static_cast<Eigen::Index>(cfg_.entity_categories) *
                       cfg_.entity_categories,
                   cfg_.predicate_categories),
      false);
  const int feat = cfg_.query_dim + 2 * cfg_.model_dim + 2 * cfg_.word_dim;
  head_ = nn::Mlp(store_, "cls.head", feat, cfg_.mlp_hidden,
                  cfg_.predicate_categories + 1, rng);
}

void Classifier::set_prior(const Matrix& prior) {
  if (prior.rows() != prior_->value.rows() ||
      prior.cols() != prior_->value.cols() || !prior.allFinite()) {
    throw InvalidInput("set_prior: expected finite " +
                       std::to_string(prior_->value.rows()) + "x" +
                       std::to_string(prior_->value.cols()) + " table");
  }
  prior_->value = prior;
}

void Classifier::set_entity_embeddings(const Matrix& table) {
  if (table.rows() != entity_embedding_->value.rows() ||
      table.cols() != entity_embedding_->value.cols() || !table.allFinite()) {
    throw InvalidInput("set_entity_embeddings: shape mismatch");
  }
  entity_embedding_->value = table;
}

ad::Var Classifier::encode(ad::Tape& tape, const ad::Var& pooled) const {
  ad::Var x = pooled;
  for (const auto& layer : encoder_) x = layer(tape, x);
  return x;
}

Raca::Output Classifier::decode(ad::Tape& tape, const ad::Var& encoded) const {
  ad::Var q = tape.param(*queries_);
  Raca::Output out;
  for (const auto& layer : decoder_) {
    out = layer(tape, q, encoded);
    q = out.fused;
  }
  return out;
}

ClassifierForward Classifier::forward(
    ad::Tape& tape, std::span<const Tracklet> entities,
    std::span<const Matrix> appearance,
    const std::optional<std::vector<std::pair<int, int>>>& fixed_edges) const {
  const int n = static_cast<int>(entities.size());
  if (n < 1) throw InvalidInput("classifier: at least one entity required");
  if (appearance.size() != entities.size()) {
    throw InvalidInput("classifier: one appearance matrix per entity");
  }
  std::vector<ad::Var> rows;
  rows.reserve(n);
  std::vector<int> categories(n);
  for (int i = 0; i < n; ++i) {
    const Tracklet& t = entities[i];
    if (t.category < 0 || t.category >= cfg_.entity_categories) {
      throw InvalidInput("classifier: entity category out of range");
    }
    if (appearance[i].rows() != t.length()) {
      throw InvalidInput("classifier: appearance rows != tracklet length");
    }
    categories[i] = t.category;
    rows.push_back(
        tracklet_encoder_(tape, appearance[i], spatial_feature(t.boxes)).pooled);
  }
  ClassifierForward out;
  out.pooled = ad::concat_rows(rows);
  out.encoded = encode(tape, out.pooled);
  const Raca::Output dec = decode(tape, out.encoded);
  out.queries = dec.fused;
  out.subject_attn = dec.subject_attn;
  out.object_attn = dec.object_attn;
  if (fixed_edges) {
    if (static_cast<int>(fixed_edges->size()) != cfg_.queries) {
      throw InvalidInput("classifier: fixed_edges must have one entry per query");
    }
    for (const auto& [s, o] : *fixed_edges) {
      if (s < 0 || s >= n || o < 0 || o >= n) {
        throw InvalidInput("classifier: fixed edge out of range");
      }
    }
    out.edges = *fixed_edges;
  } else {
    out.edges = select_edges(dec.subject_attn.value(), dec.object_attn.value());
  }

  const int m = cfg_.queries;
  std::vector<int> js(m), jo(m), cs(m), co(m);
  Matrix prior_rows = Matrix::Zero(m, cfg_.predicate_categories + 1);
  for (int j = 0; j < m; ++j) {
    js[j] = out.edges[j].first;
    jo[j] = out.edges[j].second;
    cs[j] = categories[js[j]];
    co[j] = categories[jo[j]];
    prior_rows.row(j).head(cfg_.predicate_categories) =
        prior_->value.row(cs[j] * cfg_.entity_categories + co[j]);
  }
  const ad::Var emb = tape.param(*entity_embedding_);
  const ad::Var feature = ad::concat_cols(
      {out.queries, ad::gather_rows(out.pooled, js),
       ad::gather_rows(out.pooled, jo), ad::gather_rows(emb, cs),
       ad::gather_rows(emb, co)});
  const ad::Var logits =
      ad::add(head_(tape, feature), tape.constant(std::move(prior_rows)));
  out.probs = ad::softmax_rows(logits);
  return out;
}

Classification Classifier::classify(std::span<const Tracklet> entities,
                                    std::span<const Matrix> appearance) const {
  ad::Tape tape;
  const ClassifierForward f = forward(tape, entities, appearance);
  Classification c;
  c.probs = f.probs.value();
  c.subject_attn = f.subject_attn.value();
  c.object_attn = f.object_attn.value();
  c.edges = f.edges;
  return c;
}

}  // namespace vidsgg
