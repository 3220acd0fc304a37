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

#include "vidsgg/config_json.hpp"

#include <string>
#include <vector>

#include "vidsgg/errors.hpp"

namespace vidsgg {
namespace {

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("config field '") + key + "': " + e.what());
  }
}

void require_object(const Json& j, const char* what) {
  if (!j.is_null() && !j.is_object()) {
    throw InvalidInput(std::string(what) + ": expected a JSON object");
  }
}

}  // namespace

Json classifier_config_to_json(const ClassifierConfig& c) {
  return Json{{"entity_categories", c.entity_categories},
              {"predicate_categories", c.predicate_categories},
              {"queries", c.queries},
              {"model_dim", c.model_dim},
              {"query_dim", c.query_dim},
              {"heads", c.heads},
              {"encoder_layers", c.encoder_layers},
              {"decoder_layers", c.decoder_layers},
              {"mlp_hidden", c.mlp_hidden},
              {"word_dim", c.word_dim},
              {"appearance_dim", c.features.appearance_dim},
              {"feature_hidden", c.features.hidden},
              {"pool_len", c.features.pool_len},
              {"conv_kernel", c.features.conv_kernel},
              {"seed", c.seed}};
}

ClassifierConfig classifier_config_from_json(const Json& j, ClassifierConfig c) {
  require_object(j, "classifier config");
  if (j.is_null()) return c;
  read(j, "entity_categories", c.entity_categories);
  read(j, "predicate_categories", c.predicate_categories);
  read(j, "queries", c.queries);
  read(j, "model_dim", c.model_dim);
  read(j, "query_dim", c.query_dim);
  read(j, "heads", c.heads);
  read(j, "encoder_layers", c.encoder_layers);
  read(j, "decoder_layers", c.decoder_layers);
  read(j, "mlp_hidden", c.mlp_hidden);
  read(j, "word_dim", c.word_dim);
  read(j, "appearance_dim", c.features.appearance_dim);
  read(j, "feature_hidden", c.features.hidden);
  read(j, "pool_len", c.features.pool_len);
  read(j, "conv_kernel", c.features.conv_kernel);
  read(j, "seed", c.seed);
  c.features.model_dim = c.model_dim;
  c.validate();
  return c;
}

Json grounding_config_to_json(const GroundingConfig& c) {
  return Json{{"entity_categories", c.entity_categories},
              {"predicate_categories", c.predicate_categories},
              {"word_dim", c.word_dim},
              {"frame_dim", c.frame_dim},
              {"model_dim", c.model_dim},
              {"heads", c.heads},
              {"mlp_hidden", c.mlp_hidden},
              {"bins", c.bins},
              {"dilations", c.dilations},
              {"frame_positions", c.frame_positions},
              {"seed", c.seed}};
}

GroundingConfig grounding_config_from_json(const Json& j, GroundingConfig c) {
  require_object(j, "grounding config");
  if (j.is_null()) return c;
  read(j, "entity_categories", c.entity_categories);
  read(j, "predicate_categories", c.predicate_categories);
  read(j, "word_dim", c.word_dim);
  read(j, "frame_dim", c.frame_dim);
  read(j, "model_dim", c.model_dim);
  read(j, "heads", c.heads);
  read(j, "mlp_hidden", c.mlp_hidden);
  read(j, "bins", c.bins);
  read(j, "dilations", c.dilations);
  read(j, "frame_positions", c.frame_positions);
  read(j, "seed", c.seed);
  c.validate();
  return c;
}

Json train_options_to_json(const TrainOptions& o) {
  return Json{{"epochs", o.epochs},
              {"batch_size", o.batch_size},
              {"lr", o.lr.base},
              {"milestones", o.lr.milestones},
              {"lr_factor", o.lr.factor},
              {"grad_clip", o.adam.grad_clip},
              {"seed", o.seed},
              {"threads", o.threads},
              {"lambda_att", o.lambda_att}};
}

TrainOptions train_options_from_json(const Json& j, TrainOptions o) {
  require_object(j, "train options");
  if (j.is_null()) return o;
  read(j, "epochs", o.epochs);
  read(j, "batch_size", o.batch_size);
  read(j, "lr", o.lr.base);
  read(j, "milestones", o.lr.milestones);
  read(j, "lr_factor", o.lr.factor);
  read(j, "grad_clip", o.adam.grad_clip);
  read(j, "seed", o.seed);
  read(j, "threads", o.threads);
  read(j, "lambda_att", o.lambda_att);
  if (o.epochs < 0 || o.batch_size < 1 || o.threads < 1 || !(o.lr.base > 0) ||
      o.adam.grad_clip < 0) {
    throw InvalidInput("train options: epochs >= 0, batch_size >= 1, "
                       "threads >= 1, lr > 0, grad_clip >= 0 required");
  }
  return o;
}

TrainOptions reference_classifier_schedule() {
  TrainOptions o;
  o.epochs = 60;
  o.batch_size = 4;
  o.lr = {5e-5, {50}, 0.2};
  return o;
}

TrainOptions reference_grounding_schedule() {
  TrainOptions o;
  o.epochs = 70;
  o.batch_size = 8;
  o.lr = {5e-5, {40, 60}, 0.2};
  return o;
}

TrainOptions desk_classifier_schedule() {
  TrainOptions o;
  o.epochs = 100;
  o.batch_size = 4;
  o.lr = {1e-3, {60, 85}, 0.2};
  o.adam.grad_clip = 1.0;
  return o;
}

TrainOptions desk_grounding_schedule() {
  TrainOptions o;
  o.epochs = 60;
  o.batch_size = 8;
  o.lr = {5e-3, {36, 51}, 0.2};
  o.adam.grad_clip = 1.0;
  return o;
}

}  // namespace vidsgg
