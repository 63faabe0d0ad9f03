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

#include <cmath>
#include <string>

#include "wlab/error.hpp"
#include "wlab/nn/ops.hpp"
#include "wlab/simd/kernels.hpp"

namespace wlab::nn {

namespace {

void check_qkv(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionConfig& cfg) {
    cfg.validate();
    const std::size_t qd = cfg.n_heads * cfg.head_dim;
    const std::size_t kvd = cfg.n_kv_heads * cfg.head_dim;
    if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2) throw ShapeError("attention: q, k, v must be [seq, heads*head_dim]");
    if (q.dim(1) != qd) throw ShapeError("attention: q width " + std::to_string(q.dim(1)) + " != n_heads*head_dim " + std::to_string(qd));
    if (k.dim(1) != kvd || v.dim(1) != kvd) {
        throw ShapeError("attention: k/v width must be n_kv_heads*head_dim = " + std::to_string(kvd));
    }
    if (k.dim(0) != q.dim(0) || v.dim(0) != q.dim(0)) throw ShapeError("attention: q, k, v sequence lengths differ");
}

}  // namespace

bool attention_allowed(std::size_t i, std::size_t j, std::optional<std::size_t> window, bool causal) {
    if (causal && j > i) return false;
    if (window && j + *window <= i) return false;
    return true;
}

AttentionOutput attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionConfig& cfg, bool causal) {
    check_qkv(q, k, v, cfg);
    const std::size_t seq = q.dim(0), hd = cfg.head_dim;
    const std::size_t qd = q.dim(1), kvd = k.dim(1);
    const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
    const auto& kern = simd::kernels();

    AttentionOutput res{Tensor({seq, qd}), Tensor({cfg.n_heads, seq, seq})};
    const float* qp = q.data().data();
    const float* kp = k.data().data();
    const float* vp = v.data().data();
    float* wp = res.weights.data().data();
    float* op = res.out.data().data();

    for (std::size_t h = 0; h < cfg.n_heads; ++h) {
        const std::size_t g = cfg.kv_head_for(h);
        for (std::size_t i = 0; i < seq; ++i) {
            float* wrow = wp + (h * seq + i) * seq;
            const float* qi = qp + i * qd + h * hd;
            float m = -INFINITY;
            for (std::size_t j = 0; j < seq; ++j) {
                if (!attention_allowed(i, j, cfg.sliding_window, causal)) continue;
                wrow[j] = kern.dot(qi, kp + j * kvd + g * hd, hd) * scale;
                m = std::max(m, wrow[j]);
            }
            double sum = 0.0;
            for (std::size_t j = 0; j < seq; ++j) {
                if (!attention_allowed(i, j, cfg.sliding_window, causal)) continue;
                wrow[j] = std::exp(wrow[j] - m);
                sum += wrow[j];
            }
            const float inv = static_cast<float>(1.0 / sum);
            float* oi = op + i * qd + h * hd;
            for (std::size_t j = 0; j < seq; ++j) {
                if (!attention_allowed(i, j, cfg.sliding_window, causal)) continue;
                wrow[j] *= inv;
                kern.axpy(wrow[j], vp + j * kvd + g * hd, oi, hd);
            }
        }
    }
    return res;
}

void attention_backward(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionConfig& cfg,
                        const Tensor& weights, const Tensor& dout, Tensor& dq, Tensor& dk, Tensor& dv) {
    check_qkv(q, k, v, cfg);
    const std::size_t seq = q.dim(0), hd = cfg.head_dim;
    const std::size_t qd = q.dim(1), kvd = k.dim(1);
    if (dout.shape() != q.shape() || dq.shape() != q.shape() || dk.shape() != k.shape() || dv.shape() != v.shape()) {
        throw ShapeError("attention_backward: gradient shapes do not match inputs");
    }
    const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
    const auto& kern = simd::kernels();
    const float* qp = q.data().data();
    const float* kp = k.data().data();
    const float* vp = v.data().data();
    const float* wp = weights.data().data();
    const float* dop = dout.data().data();
    float* dqp = dq.data().data();
    float* dkp = dk.data().data();
    float* dvp = dv.data().data();

    std::vector<float> dp(seq);
    for (std::size_t h = 0; h < cfg.n_heads; ++h) {
        const std::size_t g = cfg.kv_head_for(h);
        for (std::size_t i = 0; i < seq; ++i) {
            const float* wrow = wp + (h * seq + i) * seq;
            const float* doi = dop + i * qd + h * hd;
            double row_dot = 0.0;
            for (std::size_t j = 0; j < seq; ++j) {
                if (wrow[j] == 0.0f) {
                    dp[j] = 0.0f;
                    continue;
                }
                dp[j] = kern.dot(doi, vp + j * kvd + g * hd, hd);
                row_dot += double(wrow[j]) * dp[j];
                kern.axpy(wrow[j], doi, dvp + j * kvd + g * hd, hd);
            }
            const float* qi = qp + i * qd + h * hd;
            float* dqi = dqp + i * qd + h * hd;
            for (std::size_t j = 0; j < seq; ++j) {
                if (wrow[j] == 0.0f) continue;
                const float ds = wrow[j] * static_cast<float>(dp[j] - row_dot) * scale;
                kern.axpy(ds, kp + j * kvd + g * hd, dqi, hd);
                kern.axpy(ds, qi, dkp + j * kvd + g * hd, hd);
            }
        }
    }
}

}  // namespace wlab::nn
