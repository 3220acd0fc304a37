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

// JSON forms of model configs and training options, as stored next to
// checkpoints and accepted by the C interface. Missing keys keep defaults.

#ifndef VIDSGG_CONFIG_JSON_HPP_
#define VIDSGG_CONFIG_JSON_HPP_

#include "vidsgg/classifier.hpp"
#include "vidsgg/data_io.hpp"
#include "vidsgg/grounding.hpp"
#include "vidsgg/train.hpp"

namespace vidsgg {

Json classifier_config_to_json(const ClassifierConfig& c);
// Throws InvalidInput on wrongly typed fields or an invalid result.
ClassifierConfig classifier_config_from_json(const Json& j,
                                             ClassifierConfig base = {});

Json grounding_config_to_json(const GroundingConfig& c);
GroundingConfig grounding_config_from_json(const Json& j,
                                           GroundingConfig base = {});

// Keys: epochs, batch_size, lr, milestones, lr_factor, grad_clip, seed,
// threads, lambda_att. `on_epoch` is not serialised.
Json train_options_to_json(const TrainOptions& o);
TrainOptions train_options_from_json(const Json& j, TrainOptions base = {});

// Reference schedules: classifier 60 epochs, batch 4, 5e-5 decayed x0.2 at
// epoch 50; grounding 70 epochs, batch 8, 5e-5 divided by 5 at 40 and 60.
TrainOptions reference_classifier_schedule();
TrainOptions reference_grounding_schedule();
// Short schedules used with the desk model sizes.
TrainOptions desk_classifier_schedule();
TrainOptions desk_grounding_schedule();

}  // namespace vidsgg

#endif  // VIDSGG_CONFIG_JSON_HPP_
