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

#include "wlab/train/adamw.hpp"

#include <cmath>

#include "wlab/error.hpp"

namespace wlab::train {

void AdamWConfig::validate() const {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adamw: betas must be in [0, 1)");
    if (!(eps > 0.0)) throw ConfigError("adamw: eps must be positive");
    if (!(weight_decay >= 0.0)) throw ConfigError("adamw: weight_decay must be >= 0");
}

AdamWStats adamw_update(std::span<ParamSlot> slots, std::uint64_t& step, double lr, const AdamWConfig& cfg) {
    AdamWStats stats;
    double sq = 0.0;
    for (const auto& s : slots) {
        if (s.grad->shape() != s.value->shape() || s.first_moment->shape() != s.value->shape() ||
            s.second_moment->shape() != s.value->shape()) {
            throw ShapeError("adamw: shape mismatch for parameter '" + s.name + "'");
        }
        if (auto bad = s.grad->first_non_finite(); bad != s.grad->numel()) {
            throw TrainingAbort("adamw: non-finite gradient in parameter '" + s.name + "' at element " + std::to_string(bad));
        }
        for (float g : s.grad->data()) sq += double(g) * g;
    }
    stats.grad_norm = std::sqrt(sq);
    if (cfg.clip_norm > 0.0 && stats.grad_norm > cfg.clip_norm) stats.clip_scale = cfg.clip_norm / stats.grad_norm;

    ++step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (auto& s : slots) {
        auto p = s.value->data();
        auto g = s.grad->data();
        auto m = s.first_moment->data();
        auto v = s.second_moment->data();
        const double decay = s.decay ? lr * cfg.weight_decay : 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = double(g[i]) * stats.clip_scale;
            g[i] = static_cast<float>(gi);
            const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
            const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
            m[i] = static_cast<float>(mi);
            v[i] = static_cast<float>(vi);
            double pi = double(p[i]) * (1.0 - decay);
            pi -= lr * (mi / bc1) / (std::sqrt(vi / bc2) + cfg.eps);
            p[i] = static_cast<float>(pi);
        }
    }
    return stats;
}

OptimizerState OptimizerState::create(const model::ModelConfig& model_cfg, const AdamWConfig& cfg) {
    cfg.validate();
    return OptimizerState{cfg, model::Parameters::zeros(model_cfg), model::Parameters::zeros(model_cfg), 0};
}

AdamWStats adamw_step(model::Parameters& params, model::Parameters& grads, OptimizerState& state, double lr) {
    std::vector<ParamSlot> slots;
    params.visit([&](const std::string& name, Tensor& t) {
        slots.push_back(ParamSlot{name, &t, grads.find(name), state.first_moment.find(name), state.second_moment.find(name),
                                  state.config.decay_norm_gains || !model::is_norm_parameter(name)});
    });
    return adamw_update(slots, state.step, lr, state.config);
}

}  // namespace wlab::train
