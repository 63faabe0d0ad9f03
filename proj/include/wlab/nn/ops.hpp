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

#include <cstddef>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wlab/tensor.hpp"

// Architecture building blocks with hand-written backward passes.
//
// Conventions:
//  * activations are row-major [rows, features]; a sequence is [seq, dim];
//  * linear weights are [out, in] and applied as y = x W^T;
//  * every *_backward accumulates (+=) into the gradient tensors it is given,
//    which must already have the shape of the corresponding input.
namespace wlab::nn {

using TokenId = std::int32_t;

struct AttentionConfig {
    std::size_t n_heads = 1;
    std::size_t n_kv_heads = 1;
    std::size_t head_dim = 2;
    std::optional<std::size_t> sliding_window;
    float rope_theta = 10000.0f;

    // Throws ConfigError on a broken grouping, odd head_dim or window < 1.
    void validate() const;
    std::size_t group_size() const { return n_heads / n_kv_heads; }
    // Contiguous grouping: query heads [g*k, (g+1)*k) share kv head g.
    std::size_t kv_head_for(std::size_t head) const { return head * n_kv_heads / n_heads; }
};

// ---- softmax --------------------------------------------------------------

// Numerically stable softmax along `axis`. Throws NumericError naming the
// first non-finite input element.
Tensor softmax(const Tensor& logits, std::size_t axis);
// dlogits += J^T dprobs, given the forward output.
void softmax_backward(const Tensor& probs, const Tensor& dprobs, std::size_t axis, Tensor& dlogits);

// ---- dense ----------------------------------------------------------------

Tensor linear(const Tensor& x, const Tensor& w);
void linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor* dx, Tensor* dw);

Tensor embedding(const Tensor& table, std::span<const TokenId> ids);
void embedding_backward(std::span<const TokenId> ids, const Tensor& dy, Tensor& dtable);

// ---- normalization ----------------------------------------------------------

// y = x / sqrt(mean(x^2) + eps) * gain, per row of the last dimension.
Tensor rmsnorm(const Tensor& x, const Tensor& gain, float eps);
void rmsnorm_backward(const Tensor& x, const Tensor& gain, float eps, const Tensor& dy, Tensor& dx, Tensor& dgain);

// ---- feed-forward -----------------------------------------------------------

inline float sigmoid(float z) { return 1.0f / (1.0f + std::exp(-z)); }
inline float silu(float z) { return z * sigmoid(z); }

struct SwigluCache {
    Tensor gate;  // x W_gate^T
    Tensor up;    // x W_up^T
    Tensor act;   // silu(gate) * up
};

// W_down (silu(W_gate x) * (W_up x)), weights [inter, dim], [inter, dim], [dim, inter].
Tensor swiglu(const Tensor& x, const Tensor& w_gate, const Tensor& w_up, const Tensor& w_down,
              SwigluCache* cache = nullptr);

struct SwigluGrads {
    Tensor* dx = nullptr;
    Tensor* dw_gate = nullptr;
    Tensor* dw_up = nullptr;
    Tensor* dw_down = nullptr;
};
void swiglu_backward(const Tensor& x, const Tensor& w_gate, const Tensor& w_up, const Tensor& w_down,
                     const SwigluCache& cache, const Tensor& dy, const SwigluGrads& grads);

// ---- rotary embeddings ----------------------------------------------------

// Rotate each consecutive pair (2i, 2i+1) of every head by pos * theta^(-2i/head_dim).
// x is [seq, n_heads * head_dim]; head_dim defaults to the full last dimension.
Tensor rope_apply(const Tensor& x, std::span<const std::size_t> positions, float theta,
                  std::optional<std::size_t> head_dim = std::nullopt);
// The transpose of a rotation is the inverse rotation.
void rope_backward(const Tensor& dy, std::span<const std::size_t> positions, float theta, std::size_t head_dim,
                   Tensor& dx);

std::vector<std::size_t> iota_positions(std::size_t n);

// ---- attention --------------------------------------------------------------

// True when query position i may attend to key position j: j <= i if causal,
// and i - window < j when a window is set.
bool attention_allowed(std::size_t i, std::size_t j, std::optional<std::size_t> window, bool causal);

struct AttentionOutput {
    Tensor out;      // [seq, n_heads * head_dim]
    Tensor weights;  // [n_heads, seq, seq]; exactly 0 where masked
};

// q: [seq, n_heads*head_dim]; k, v: [seq, n_kv_heads*head_dim].
AttentionOutput attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionConfig& cfg,
                          bool causal);

void attention_backward(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionConfig& cfg,
                        const Tensor& weights, const Tensor& dout, Tensor& dq, Tensor& dk, Tensor& dv);

// ---- cross-entropy ----------------------------------------------------------

// -log softmax(row)[target], computed with log-sum-exp in double.
double cross_entropy_row(std::span<const float> logits, std::size_t target);
// dlogits_row += scale * (softmax(row) - onehot(target))
void cross_entropy_row_backward(std::span<const float> logits, std::size_t target, double scale,
                                std::span<float> dlogits);

// Index of the largest element; ties resolve to the lowest index.
std::size_t argmax(std::span<const float> row);

}  // namespace wlab::nn
