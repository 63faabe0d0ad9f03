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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "wlab/error.hpp"
#include "wlab/model/model.hpp"
#include "wlab/train/adamw.hpp"

using namespace wlab;
using train::AdamWConfig;
using train::ParamSlot;

namespace {

struct Slot {
    Tensor value, grad, m, v;
    ParamSlot view(const std::string& name, bool decay) { return {name, &value, &grad, &m, &v, decay}; }
};

Slot make_slot(std::initializer_list<float> values, std::initializer_list<float> grads) {
    Slot s{Tensor::vector(values), Tensor::vector(grads), {}, {}};
    s.m = Tensor::zeros(s.value.shape());
    s.v = Tensor::zeros(s.value.shape());
    return s;
}

}  // namespace

TEST_CASE("zero gradients change parameters only through weight decay") {
    AdamWConfig cfg;
    cfg.weight_decay = 0.1;
    auto s = make_slot({1.0f, -2.0f}, {0.0f, 0.0f});
    std::uint64_t step = 0;
    ParamSlot slots[] = {s.view("w", true)};
    train::adamw_update(slots, step, 0.01, cfg);
    CHECK(s.value[0] == doctest::Approx(1.0 * (1 - 0.01 * 0.1)).epsilon(1e-7));
    CHECK(s.value[1] == doctest::Approx(-2.0 * (1 - 0.01 * 0.1)).epsilon(1e-7));
    CHECK(step == 1);
}

TEST_CASE("global-norm clipping halves gradients of norm two") {
    AdamWConfig cfg;
    cfg.clip_norm = 1.0;
    auto a = make_slot({0.0f}, {1.2f}), b = make_slot({0.0f, 0.0f}, {1.6f, 0.0f});
    std::uint64_t step = 0;
    ParamSlot slots[] = {a.view("a", true), b.view("b", true)};
    const auto stats = train::adamw_update(slots, step, 1e-3, cfg);
    CHECK(stats.grad_norm == doctest::Approx(2.0));
    CHECK(stats.clip_scale == doctest::Approx(0.5));
    CHECK(a.grad[0] == doctest::Approx(0.6f));
    CHECK(b.grad[0] == doctest::Approx(0.8f));
    // First moment after one step is (1 - beta1) times the clipped gradient.
    CHECK(a.m[0] == doctest::Approx(0.1 * 0.6).epsilon(1e-6));
}

TEST_CASE("three-step scalar trajectory matches a hand-written AdamW") {
    AdamWConfig cfg;
    cfg.beta1 = 0.9;
    cfg.beta2 = 0.95;
    cfg.eps = 1e-8;
    cfg.weight_decay = 0.1;
    cfg.clip_norm = 0.0;
    const double lr = 0.05;
    const double grads[] = {0.3, -0.7, 0.2};

    double p = 0.8, m = 0, v = 0;
    auto s = make_slot({0.8f}, {0.0f});
    std::uint64_t step = 0;
    for (int t = 1; t <= 3; ++t) {
        const double g = grads[t - 1];
        m = 0.9 * m + 0.1 * g;
        v = 0.95 * v + 0.05 * g * g;
        const double mhat = m / (1 - std::pow(0.9, t)), vhat = v / (1 - std::pow(0.95, t));
        p = p * (1 - lr * 0.1) - lr * mhat / (std::sqrt(vhat) + 1e-8);

        s.grad[0] = static_cast<float>(g);
        ParamSlot slots[] = {s.view("w", true)};
        train::adamw_update(slots, step, lr, cfg);
        CHECK(std::abs(double(s.value[0]) - p) <= 1e-7);
    }
}

TEST_CASE("non-finite gradient aborts the step and names the parameter") {
    AdamWConfig cfg;
    auto a = make_slot({1.0f}, {0.5f}), b = make_slot({1.0f, 2.0f}, {0.1f, std::numeric_limits<float>::infinity()});
    std::uint64_t step = 0;
    ParamSlot slots[] = {a.view("layers.0.attention.wq", true), b.view("output", true)};
    CHECK_THROWS_WITH_AS(train::adamw_update(slots, step, 1e-3, cfg), doctest::Contains("output"), TrainingAbort);
    CHECK(a.value[0] == 1.0f);
    CHECK(step == 0);
}

TEST_CASE("norm gains are not decayed unless requested") {
    model::ModelConfig mc;
    mc.n_layers = 1;
    mc.model_dim = 4;
    mc.n_heads = 2;
    mc.n_kv_heads = 1;
    mc.head_dim = 2;
    mc.intermediate_size = 6;
    mc.vocab_size = 5;
    mc.context_length = 4;
    mc.sliding_window = 2;
    for (bool decay_gains : {false, true}) {
        AdamWConfig cfg;
        cfg.weight_decay = 0.5;
        cfg.decay_norm_gains = decay_gains;
        auto m = model::init_model(mc, 1);
        auto grads = model::Parameters::zeros(mc);
        auto state = train::OptimizerState::create(mc, cfg);
        const auto before = m.params;
        train::adamw_step(m.params, grads, state, 0.1);
        CHECK(state.step == 1);
        CHECK(m.params.final_norm[0] == (decay_gains ? doctest::Approx(0.95) : doctest::Approx(1.0)));
        CHECK(m.params.lm_head[0] == doctest::Approx(before.lm_head[0] * 0.95));
    }
}

TEST_CASE("configuration validation") {
    AdamWConfig c;
    CHECK_NOTHROW(c.validate());
    c.beta1 = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.eps = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.weight_decay = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
