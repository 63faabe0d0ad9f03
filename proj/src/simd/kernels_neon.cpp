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

// NEON kernels for AArch64, where Advanced SIMD is architecturally guaranteed.

#include <arm_neon.h>

#include <algorithm>
#include <cmath>

#include "kernels_internal.hpp"

namespace wlab::simd::detail {
namespace {

float dot(const float* a, const float* b, std::size_t n) {
    float32x4_t acc0 = vdupq_n_f32(0.0f);
    float32x4_t acc1 = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
        acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
    }
    for (; i + 4 <= n; i += 4) acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    float s = vaddvq_f32(vaddq_f32(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(float a, const float* x, float* y, std::size_t n) {
    const float32x4_t va = vdupq_n_f32(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale(float a, float* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vst1q_f32(x + i, vmulq_n_f32(vld1q_f32(x + i), a));
    for (; i < n; ++i) x[i] *= a;
}

float sum_squares(const float* x, std::size_t n) {
    float32x4_t acc = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t v = vld1q_f32(x + i);
        acc = vfmaq_f32(acc, v, v);
    }
    float s = vaddvq_f32(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

float max_value(const float* x, std::size_t n) {
    float m = -INFINITY;
    std::size_t i = 0;
    if (n >= 4) {
        float32x4_t vm = vld1q_f32(x);
        for (i = 4; i + 4 <= n; i += 4) vm = vmaxq_f32(vm, vld1q_f32(x + i));
        m = vmaxvq_f32(vm);
    }
    for (; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

float max_abs(const float* x, std::size_t n) {
    float32x4_t vm = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) vm = vmaxq_f32(vm, vabsq_f32(vld1q_f32(x + i)));
    float m = vmaxvq_f32(vm);
    for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
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
    const float32x4_t vmax = vdupq_n_f32(qmax);
    const float32x4_t vmin = vdupq_n_f32(-qmax);
    float32x4_t acc = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t x = vld1q_f32(v + i);
        float32x4_t q = vrndnq_f32(vmulq_n_f32(x, inv_scale));
        q = vminq_f32(vmaxq_f32(q, vmin), vmax);
        const float32x4_t e = vmlsq_n_f32(x, q, scale);
        const float32x4_t ee = vmulq_f32(e, e);
        acc = imp ? vfmaq_f32(acc, vld1q_f32(imp + i), ee) : vaddq_f32(acc, ee);
    }
    float s = vaddvq_f32(acc);
    for (; i < n; ++i) {
        const float q = std::clamp(std::nearbyint(v[i] * inv_scale), -qmax, qmax);
        const float e = v[i] - scale * q;
        s += (imp ? imp[i] : 1.0f) * e * e;
    }
    return s;
}

}  // namespace

const KernelTable& neon_table() {
    static const KernelTable table{Isa::Neon, dot,           axpy,          scale,         sum_squares,
                                   max_value, max_abs,       matmul_nt,     matmul_nn_acc, matmul_tn_acc,
                                   quant_sq_error};
    return table;
}

}  // namespace wlab::simd::detail
