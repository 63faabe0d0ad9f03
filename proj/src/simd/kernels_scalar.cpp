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

#include <algorithm>
#include <cmath>

#include "kernels_internal.hpp"

namespace wlab::simd::detail {
namespace {

float dot(const float* a, const float* b, std::size_t n) {
    float s = 0.0f;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(float a, const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(float a, float* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

float sum_squares(const float* x, std::size_t n) {
    float s = 0.0f;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
    return s;
}

float max_value(const float* x, std::size_t n) {
    float m = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

float max_abs(const float* x, std::size_t n) {
    float m = 0.0f;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

void matmul_nt(const float* x, const float* w, float* y, std::size_t rows, std::size_t inner, std::size_t out,
               bool accumulate) {
    for (std::size_t r = 0; r < rows; ++r) {
        const float* xr = x + r * inner;
        float* yr = y + r * out;
        for (std::size_t o = 0; o < out; ++o) {
            const float v = dot(xr, w + o * inner, inner);
            yr[o] = accumulate ? yr[o] + v : v;
        }
    }
}

void matmul_nn_acc(const float* g, const float* w, float* dx, std::size_t rows, std::size_t out,
                   std::size_t inner) {
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t o = 0; o < out; ++o) axpy(g[r * out + o], w + o * inner, dx + r * inner, inner);
    }
}

void matmul_tn_acc(const float* g, const float* x, float* dw, std::size_t rows, std::size_t out,
                   std::size_t inner) {
    for (std::size_t o = 0; o < out; ++o) {
        for (std::size_t r = 0; r < rows; ++r) axpy(g[r * out + o], x + r * inner, dw + o * inner, inner);
    }
}

float quant_sq_error(const float* v, const float* imp, std::size_t n, float scale, float inv_scale, float qmax) {
    float s = 0.0f;
    for (std::size_t i = 0; i < n; ++i) {
        const float q = std::clamp(std::nearbyint(v[i] * inv_scale), -qmax, qmax);
        const float e = v[i] - scale * q;
        s += (imp ? imp[i] : 1.0f) * e * e;
    }
    return s;
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{Isa::Scalar, dot,           axpy,          scale,         sum_squares,
                                   max_value,   max_abs,       matmul_nt,     matmul_nn_acc, matmul_tn_acc,
                                   quant_sq_error};
    return table;
}

}  // namespace wlab::simd::detail
