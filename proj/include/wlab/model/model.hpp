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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlab/model/config.hpp"
#include "wlab/nn/ops.hpp"
#include "wlab/tensor.hpp"

namespace wlab::model {

using nn::TokenId;

struct LayerParams {
    Tensor attn_norm;  // [d]
    Tensor wq;         // [n_heads*hd, d]
    Tensor wk;         // [n_kv*hd, d]
    Tensor wv;         // [n_kv*hd, d]
    Tensor wo;         // [d, n_heads*hd]
    Tensor ffn_norm;   // [d]
    Tensor w_gate;     // [ff, d]
    Tensor w_up;       // [ff, d]
    Tensor w_down;     // [d, ff]

    friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

// Every trainable tensor of the network. Also used, with identical shapes,
// for gradients and optimizer moments.
struct Parameters {
    Tensor embedding;  // [vocab, d]
    std::vector<LayerParams> layers;
    Tensor final_norm;  // [d]
    Tensor lm_head;     // [vocab, d], not tied to the embedding

    static Parameters zeros(const ModelConfig& cfg);

    // Visit (name, tensor) in canonical order; the order is the checkpoint order.
    void visit(const std::function<void(const std::string&, Tensor&)>& fn);
    void visit(const std::function<void(const std::string&, const Tensor&)>& fn) const;

    Tensor* find(std::string_view name);
    const Tensor* find(std::string_view name) const;
    std::uint64_t count() const;

    friend bool operator==(const Parameters&, const Parameters&) = default;
};

// Gains (RMSNorm weights) are kept at full precision by the quantizer and
// excluded from weight decay.
bool is_norm_parameter(std::string_view name);

struct TinyModel {
    ModelConfig config;
    Parameters params;

    friend bool operator==(const TinyModel&, const TinyModel&) = default;
};

// Deterministic initialization: linear and embedding weights ~ N(0, 0.02^2),
// norm gains = 1.
TinyModel init_model(const ModelConfig& config, std::uint64_t seed);

struct LayerCache {
    Tensor x_in;     // residual stream entering the layer
    Tensor h_attn;   // rmsnorm(x_in)
    Tensor q, k, v;  // after rotary embedding (q, k)
    Tensor attn_weights;
    Tensor attn_out;  // before wo
    Tensor x_mid;     // residual after attention
    Tensor h_ffn;     // rmsnorm(x_mid)
    nn::SwigluCache ffn;
};

struct ForwardCache {
    std::vector<TokenId> ids;
    std::vector<LayerCache> layers;
    Tensor x_final;  // residual before the final norm
    Tensor h_final;  // after the final norm
};

// Called with the name of each linear weight and the activations fed into it.
using LinearObserver = std::function<void(const std::string& weight_name, const Tensor& input)>;

// Logits [len(ids), vocab]. Pre-norm blocks: x += attn(norm(x)); x += ffn(norm(x)).
// Throws ShapeError on out-of-range ids or sequences longer than the context.
Tensor forward(const TinyModel& model, std::span<const TokenId> ids, ForwardCache* cache = nullptr,
               const LinearObserver& observer = {});

// Accumulate dL/dparams into grads given dL/dlogits and the cache of the forward pass.
void backward(const TinyModel& model, const ForwardCache& cache, const Tensor& dlogits, Parameters& grads);

}  // namespace wlab::model
