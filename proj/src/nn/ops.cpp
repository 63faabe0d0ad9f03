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

#include "wlab/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wlab/error.hpp"
#include "wlab/simd/kernels.hpp"

namespace wlab::nn {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shape " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
    }
}

void require_rank2(const Tensor& t, const char* what) {
    if (t.rank() != 2) throw ShapeError(std::string(what) + ": expected rank-2 tensor, got " + shape_to_string(t.shape()));
}

std::string multi_index(const Shape& shape, std::size_t flat) {
    std::vector<std::size_t> idx(shape.size());
    for (std::size_t a = shape.size(); a-- > 0;) {
        idx[a] = flat % shape[a];
        flat /= shape[a];
    }
    return shape_to_string(idx);
}

struct AxisLayout {
    std::size_t outer, extent, inner;
};

AxisLayout axis_layout(const Shape& shape, std::size_t axis) {
    if (axis >= shape.size()) {
        throw ShapeError("softmax axis " + std::to_string(axis) + " invalid for shape " + shape_to_string(shape));
    }
    AxisLayout l{1, shape[axis], 1};
    for (std::size_t a = 0; a < axis; ++a) l.outer *= shape[a];
    for (std::size_t a = axis + 1; a < shape.size(); ++a) l.inner *= shape[a];
    return l;
}

}  // namespace

void AttentionConfig::validate() const {
    if (n_heads == 0 || n_kv_heads == 0 || head_dim == 0) throw ConfigError("attention: head counts and head_dim must be positive");
    if (n_heads % n_kv_heads != 0) {
        throw ConfigError("attention: n_heads (" + std::to_string(n_heads) + ") not divisible by n_kv_heads (" +
                          std::to_string(n_kv_heads) + ")");
    }
    if (head_dim % 2 != 0) throw ConfigError("attention: head_dim must be even for rotary embeddings, got " + std::to_string(head_dim));
    if (sliding_window && *sliding_window < 1) throw ConfigError("attention: sliding window must be >= 1");
    if (!(rope_theta > 0.0f)) throw ConfigError("attention: rope_theta must be positive");
}

// ---- softmax ----------------------------------------------------------------

Tensor softmax(const Tensor& logits, std::size_t axis) {
    const auto l = axis_layout(logits.shape(), axis);
    if (auto bad = logits.first_non_finite(); bad != logits.numel()) {
        throw NumericError("softmax: non-finite logit at index " + multi_index(logits.shape(), bad));
    }
    Tensor out(logits.shape());
    const float* in = logits.data().data();
    float* o = out.data().data();
    const auto& k = simd::kernels();
    for (std::size_t a = 0; a < l.outer; ++a) {
        for (std::size_t b = 0; b < l.inner; ++b) {
            const std::size_t base = a * l.extent * l.inner + b;
            float m;
            if (l.inner == 1) {
                m = k.max_value(in + base, l.extent);
            } else {
                m = -INFINITY;
                for (std::size_t i = 0; i < l.extent; ++i) m = std::max(m, in[base + i * l.inner]);
            }
            double sum = 0.0;
            for (std::size_t i = 0; i < l.extent; ++i) {
                const float e = std::exp(in[base + i * l.inner] - m);
                o[base + i * l.inner] = e;
                sum += e;
            }
            const float inv = static_cast<float>(1.0 / sum);
            for (std::size_t i = 0; i < l.extent; ++i) o[base + i * l.inner] *= inv;
        }
    }
    return out;
}

void softmax_backward(const Tensor& probs, const Tensor& dprobs, std::size_t axis, Tensor& dlogits) {
    require_same_shape(probs, dprobs, "softmax_backward");
    require_same_shape(probs, dlogits, "softmax_backward");
    const auto l = axis_layout(probs.shape(), axis);
    const float* p = probs.data().data();
    const float* dp = dprobs.data().data();
    float* dl = dlogits.data().data();
    for (std::size_t a = 0; a < l.outer; ++a) {
        for (std::size_t b = 0; b < l.inner; ++b) {
            const std::size_t base = a * l.extent * l.inner + b;
            double dotp = 0.0;
            for (std::size_t i = 0; i < l.extent; ++i) dotp += double(p[base + i * l.inner]) * dp[base + i * l.inner];
            for (std::size_t i = 0; i < l.extent; ++i) {
                const std::size_t j = base + i * l.inner;
                dl[j] += static_cast<float>(p[j] * (dp[j] - dotp));
            }
        }
    }
}

// ---- dense ------------------------------------------------------------------

Tensor linear(const Tensor& x, const Tensor& w) {
    require_rank2(w, "linear weight");
    const std::size_t in = w.dim(1), out_dim = w.dim(0);
    if (x.last_dim() != in) {
        throw ShapeError("linear: input last dim " + std::to_string(x.last_dim()) + " does not match weight " +
                         shape_to_string(w.shape()));
    }
    Shape ys = x.shape();
    ys.back() = out_dim;
    Tensor y(ys);
    simd::kernels().matmul_nt(x.data().data(), w.data().data(), y.data().data(), x.rows(), in, out_dim, false);
    return y;
}

void linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor* dx, Tensor* dw) {
    const std::size_t in = w.dim(1), out_dim = w.dim(0), rows = x.rows();
    if (dy.last_dim() != out_dim || dy.rows() != rows) throw ShapeError("linear_backward: upstream gradient shape mismatch");
    const auto& k = simd::kernels();
    if (dx) {
        require_same_shape(x, *dx, "linear_backward dx");
        k.matmul_nn_acc(dy.data().data(), w.data().data(), dx->data().data(), rows, out_dim, in);
    }
    if (dw) {
        require_same_shape(w, *dw, "linear_backward dw");
        k.matmul_tn_acc(dy.data().data(), x.data().data(), dw->data().data(), rows, out_dim, in);
    }
}

Tensor embedding(const Tensor& table, std::span<const TokenId> ids) {
    require_rank2(table, "embedding table");
    const std::size_t vocab = table.dim(0), d = table.dim(1);
    Tensor out({ids.size(), d});
    for (std::size_t t = 0; t < ids.size(); ++t) {
        if (ids[t] < 0 || static_cast<std::size_t>(ids[t]) >= vocab) {
            throw ShapeError("embedding: token id " + std::to_string(ids[t]) + " at position " + std::to_string(t) +
                             " out of range for vocab " + std::to_string(vocab));
        }
        auto src = table.row(static_cast<std::size_t>(ids[t]));
        std::copy(src.begin(), src.end(), out.row(t).begin());
    }
    return out;
}

void embedding_backward(std::span<const TokenId> ids, const Tensor& dy, Tensor& dtable) {
    const auto& k = simd::kernels();
    for (std::size_t t = 0; t < ids.size(); ++t) {
        auto src = dy.row(t);
        k.axpy(1.0f, src.data(), dtable.row(static_cast<std::size_t>(ids[t])).data(), src.size());
    }
}

// ---- normalization ------------------------------------------------------------

Tensor rmsnorm(const Tensor& x, const Tensor& gain, float eps) {
    const std::size_t d = x.last_dim();
    if (gain.numel() != d) {
        throw ShapeError("rmsnorm: gain length " + std::to_string(gain.numel()) + " != last dim " + std::to_string(d));
    }
    if (eps < 0.0f) throw ConfigError("rmsnorm: eps must be non-negative");
    Tensor y(x.shape());
    const auto& k = simd::kernels();
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto xr = x.row(r);
        auto yr = y.row(r);
        const float ms = k.sum_squares(xr.data(), d) / static_cast<float>(d);
        const float inv = 1.0f / std::sqrt(ms + eps);
        for (std::size_t i = 0; i < d; ++i) yr[i] = xr[i] * inv * gain[i];
    }
    return y;
}

void rmsnorm_backward(const Tensor& x, const Tensor& gain, float eps, const Tensor& dy, Tensor& dx, Tensor& dgain) {
    require_same_shape(x, dy, "rmsnorm_backward");
    require_same_shape(x, dx, "rmsnorm_backward dx");
    const std::size_t d = x.last_dim();
    const auto& k = simd::kernels();
    std::vector<float> gdy(d);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto xr = x.row(r);
        auto dyr = dy.row(r);
        auto dxr = dx.row(r);
        const float ms = k.sum_squares(xr.data(), d) / static_cast<float>(d);
        const float inv = 1.0f / std::sqrt(ms + eps);
        for (std::size_t i = 0; i < d; ++i) {
            gdy[i] = gain[i] * dyr[i];
            dgain[i] += dyr[i] * xr[i] * inv;
        }
        // d/dx [x * inv] = inv * (g - x * (x.g) * inv^2 / d)
        const float proj = k.dot(gdy.data(), xr.data(), d) * inv * inv / static_cast<float>(d);
        for (std::size_t i = 0; i < d; ++i) dxr[i] += inv * (gdy[i] - xr[i] * proj);
    }
}

// ---- feed-forward -------------------------------------------------------------

Tensor swiglu(const Tensor& x, const Tensor& w_gate, const Tensor& w_up, const Tensor& w_down, SwigluCache* cache) {
    require_same_shape(w_gate, w_up, "swiglu gate/up");
    require_rank2(w_down, "swiglu down");
    if (w_down.dim(1) != w_gate.dim(0) || w_down.dim(0) != w_gate.dim(1)) {
        throw ShapeError("swiglu: projections do not compose: gate " + shape_to_string(w_gate.shape()) + ", down " +
                         shape_to_string(w_down.shape()));
    }
    Tensor gate = linear(x, w_gate);
    Tensor up = linear(x, w_up);
    Tensor act(gate.shape());
    for (std::size_t i = 0; i < act.numel(); ++i) act[i] = silu(gate[i]) * up[i];
    Tensor y = linear(act, w_down);
    if (cache) *cache = SwigluCache{std::move(gate), std::move(up), std::move(act)};
    return y;
}

void swiglu_backward(const Tensor& x, const Tensor& w_gate, const Tensor& w_up, const Tensor& w_down,
                     const SwigluCache& cache, const Tensor& dy, const SwigluGrads& grads) {
    Tensor dact(cache.act.shape());
    linear_backward(cache.act, w_down, dy, &dact, grads.dw_down);
    Tensor dgate(cache.gate.shape());
    Tensor dup(cache.up.shape());
    for (std::size_t i = 0; i < dact.numel(); ++i) {
        const float z = cache.gate[i];
        const float s = sigmoid(z);
        dup[i] = dact[i] * z * s;
        dgate[i] = dact[i] * cache.up[i] * s * (1.0f + z * (1.0f - s));
    }
    linear_backward(x, w_gate, dgate, grads.dx, grads.dw_gate);
    linear_backward(x, w_up, dup, grads.dx, grads.dw_up);
}

// ---- rotary embeddings ----------------------------------------------------------

std::vector<std::size_t> iota_positions(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    return p;
}

namespace {

void rope_rotate(const Tensor& x, std::span<const std::size_t> positions, float theta, std::size_t head_dim,
                 float sign, Tensor& out, bool accumulate) {
    const std::size_t d = x.last_dim();
    if (head_dim == 0 || head_dim % 2 != 0) {
        throw ConfigError("rope: head_dim must be even and positive, got " + std::to_string(head_dim));
    }
    if (d % head_dim != 0) throw ShapeError("rope: last dim " + std::to_string(d) + " not a multiple of head_dim");
    if (positions.size() != x.rows()) {
        throw ShapeError("rope: " + std::to_string(positions.size()) + " positions for " + std::to_string(x.rows()) + " rows");
    }
    const std::size_t half = head_dim / 2;
    std::vector<double> freq(half);
    for (std::size_t i = 0; i < half; ++i) {
        freq[i] = std::pow(static_cast<double>(theta), -2.0 * static_cast<double>(i) / static_cast<double>(head_dim));
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto xr = x.row(r);
        auto orow = out.row(r);
        const double pos = static_cast<double>(positions[r]);
        for (std::size_t i = 0; i < half; ++i) {
            const double ang = pos * freq[i];
            const float c = static_cast<float>(std::cos(ang));
            const float s = sign * static_cast<float>(std::sin(ang));
            for (std::size_t h = 0; h < d; h += head_dim) {
                const float a = xr[h + 2 * i], b = xr[h + 2 * i + 1];
                const float ra = a * c - b * s;
                const float rb = a * s + b * c;
                if (accumulate) {
                    orow[h + 2 * i] += ra;
                    orow[h + 2 * i + 1] += rb;
                } else {
                    orow[h + 2 * i] = ra;
                    orow[h + 2 * i + 1] = rb;
                }
            }
        }
    }
}

}  // namespace

Tensor rope_apply(const Tensor& x, std::span<const std::size_t> positions, float theta,
                  std::optional<std::size_t> head_dim) {
    Tensor out(x.shape());
    rope_rotate(x, positions, theta, head_dim.value_or(x.last_dim()), 1.0f, out, false);
    return out;
}

void rope_backward(const Tensor& dy, std::span<const std::size_t> positions, float theta, std::size_t head_dim,
                   Tensor& dx) {
    require_same_shape(dy, dx, "rope_backward");
    rope_rotate(dy, positions, theta, head_dim, -1.0f, dx, true);
}

// ---- cross-entropy --------------------------------------------------------------

double cross_entropy_row(std::span<const float> logits, std::size_t target) {
    if (target >= logits.size()) throw ShapeError("cross_entropy: target " + std::to_string(target) + " out of range");
    double m = -INFINITY;
    for (float v : logits) m = std::max(m, static_cast<double>(v));
    double s = 0.0;
    for (float v : logits) s += std::exp(static_cast<double>(v) - m);
    return m + std::log(s) - static_cast<double>(logits[target]);
}

void cross_entropy_row_backward(std::span<const float> logits, std::size_t target, double scale,
                                std::span<float> dlogits) {
    double m = -INFINITY;
    for (float v : logits) m = std::max(m, static_cast<double>(v));
    double s = 0.0;
    for (float v : logits) s += std::exp(static_cast<double>(v) - m);
    const double inv = 1.0 / s;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        const double p = std::exp(static_cast<double>(logits[c]) - m) * inv;
        dlogits[c] += static_cast<float>(scale * (p - (c == target ? 1.0 : 0.0)));
    }
}

std::size_t argmax(std::span<const float> row) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < row.size(); ++i) {
        if (row[i] > row[best]) best = i;
    }
    return best;
}

}  // namespace wlab::nn
