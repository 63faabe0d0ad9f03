/*
 * Copyright 2026 The WLab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wlab/model/model.hpp"

namespace wlab::train {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.95;
    double eps = 1e-8;
    double weight_decay = 0.1;
    double clip_norm = 1.0;      // <= 0 disables clipping
    bool decay_norm_gains = false;

    void validate() const;
};

// One trainable tensor as seen by the optimizer.
struct ParamSlot {
    std::string name;
    Tensor* value;
    Tensor* grad;
    Tensor* first_moment;
    Tensor* second_moment;
    bool decay;
};

struct AdamWStats {
    double grad_norm = 0.0;   // global L2 norm before clipping
    double clip_scale = 1.0;  // factor applied to every gradient
};

// Global-norm clipping followed by bias-corrected AdamW with decoupled weight
// decay (p -= lr * wd * p). `step` is incremented. Gradients are clipped in
// place. A non-finite gradient aborts before anything is modified, with a
// TrainingAbort naming the parameter.
AdamWStats adamw_update(std::span<ParamSlot> slots, std::uint64_t& step, double lr, const AdamWConfig& cfg);

struct OptimizerState {
    AdamWConfig config;
    model::Parameters first_moment;
    model::Parameters second_moment;
    std::uint64_t step = 0;

    static OptimizerState create(const model::ModelConfig& model_cfg, const AdamWConfig& cfg);
};

AdamWStats adamw_step(model::Parameters& params, model::Parameters& grads, OptimizerState& state, double lr);

}  // namespace wlab::train
