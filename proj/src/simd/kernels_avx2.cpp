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

// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "kernels_internal.hpp"

namespace wlab::simd::detail {
namespace {

inline float hsum(__m256 v) {
    __m128 lo = _mm256_castps256_ps128(v);
    __m128 hi = _mm256_extractf128_ps(v, 1);
    lo = _mm_add_ps(lo, hi);
    __m128 sh = _mm_movehdup_ps(lo);
    __m128 s = _mm_add_ps(lo, sh);
    sh = _mm_movehl_ps(sh, s);
    s = _mm_add_ss(s, sh);
    return _mm_cvtss_f32(s);
}

inline float hmax(__m256 v) {
    __m128 m = _mm_max_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps(v, 1));
    m = _mm_max_ps(m, _mm_movehl_ps(m, m));
    m = _mm_max_ss(m, _mm_movehdup_ps(m));
    return _mm_cvtss_f32(m);
}

float dot(const float* a, const float* b, std::size_t n) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    float s = hsum(_mm256_add_ps(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(float a, const float* x, float* y, std::size_t n) {
    const __m256 va = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale(float a, float* x, std::size_t n) {
    const __m256 va = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) _mm256_storeu_ps(x + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

float sum_squares(const float* x, std::size_t n) {
    __m256 acc = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 v = _mm256_loadu_ps(x + i);
        acc = _mm256_fmadd_ps(v, v, acc);
    }
    float s = hsum(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return s;
}

float max_value(const float* x, std::size_t n) {
    float m = -INFINITY;
    std::size_t i = 0;
    if (n >= 8) {
        __m256 vm = _mm256_loadu_ps(x);
        for (i = 8; i + 8 <= n; i += 8) vm = _mm256_max_ps(vm, _mm256_loadu_ps(x + i));
        m = hmax(vm);
    }
    for (; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

float max_abs(const float* x, std::size_t n) {
    const __m256 sign = _mm256_set1_ps(-0.0f);
    __m256 vm = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) vm = _mm256_max_ps(vm, _mm256_andnot_ps(sign, _mm256_loadu_ps(x + i)));
    float m = hmax(vm);
    for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

void matmul_nt(const float* x, const float* w, float* y, std::size_t rows, std::size_t inner, std::size_t out,
               bool accumulate) {
    const std::size_t vec_end = inner & ~std::size_t{7};
    for (std::size_t r = 0; r < rows; ++r) {
        const float* xr = x + r * inner;
        float* yr = y + r * out;
        std::size_t o = 0;
        // Four output columns per pass so each x chunk is loaded once.
        for (; o + 4 <= out; o += 4) {
            const float* w0 = w + (o + 0) * inner;
            const float* w1 = w + (o + 1) * inner;
            const float* w2 = w + (o + 2) * inner;
            const float* w3 = w + (o + 3) * inner;
            __m256 a0 = _mm256_setzero_ps(), a1 = _mm256_setzero_ps();
            __m256 a2 = _mm256_setzero_ps(), a3 = _mm256_setzero_ps();
            for (std::size_t k = 0; k < vec_end; k += 8) {
                const __m256 xv = _mm256_loadu_ps(xr + k);
                a0 = _mm256_fmadd_ps(xv, _mm256_loadu_ps(w0 + k), a0);
                a1 = _mm256_fmadd_ps(xv, _mm256_loadu_ps(w1 + k), a1);
                a2 = _mm256_fmadd_ps(xv, _mm256_loadu_ps(w2 + k), a2);
                a3 = _mm256_fmadd_ps(xv, _mm256_loadu_ps(w3 + k), a3);
            }
            float s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
            for (std::size_t k = vec_end; k < inner; ++k) {
                s0 += xr[k] * w0[k];
                s1 += xr[k] * w1[k];
                s2 += xr[k] * w2[k];
                s3 += xr[k] * w3[k];
            }
            if (accumulate) {
                yr[o] += s0, yr[o + 1] += s1, yr[o + 2] += s2, yr[o + 3] += s3;
            } else {
                yr[o] = s0, yr[o + 1] = s1, yr[o + 2] = s2, yr[o + 3] = s3;
            }
        }
        for (; o < out; ++o) {
            const float v = dot(xr, w + o * inner, inner);
            yr[o] = accumulate ? yr[o] + v : v;
        }
    }
}

// acc[k..k+31] += sum_j coef(j) * src(j)[k..k+31], with the destination chunk held in registers.
template <typename Coef, typename Src>
void accumulate_rows(float* dst, std::size_t inner, std::size_t count, Coef coef, Src src) {
    std::size_t k = 0;
    for (; k + 32 <= inner; k += 32) {
        __m256 d0 = _mm256_loadu_ps(dst + k), d1 = _mm256_loadu_ps(dst + k + 8);
        __m256 d2 = _mm256_loadu_ps(dst + k + 16), d3 = _mm256_loadu_ps(dst + k + 24);
        for (std::size_t j = 0; j < count; ++j) {
            const __m256 c = _mm256_set1_ps(coef(j));
            const float* s = src(j) + k;
            d0 = _mm256_fmadd_ps(c, _mm256_loadu_ps(s), d0);
            d1 = _mm256_fmadd_ps(c, _mm256_loadu_ps(s + 8), d1);
            d2 = _mm256_fmadd_ps(c, _mm256_loadu_ps(s + 16), d2);
            d3 = _mm256_fmadd_ps(c, _mm256_loadu_ps(s + 24), d3);
        }
        _mm256_storeu_ps(dst + k, d0);
        _mm256_storeu_ps(dst + k + 8, d1);
        _mm256_storeu_ps(dst + k + 16, d2);
        _mm256_storeu_ps(dst + k + 24, d3);
    }
    for (; k + 8 <= inner; k += 8) {
        __m256 d0 = _mm256_loadu_ps(dst + k);
        for (std::size_t j = 0; j < count; ++j) {
            d0 = _mm256_fmadd_ps(_mm256_set1_ps(coef(j)), _mm256_loadu_ps(src(j) + k), d0);
        }
        _mm256_storeu_ps(dst + k, d0);
    }
    for (; k < inner; ++k) {
        float d = dst[k];
        for (std::size_t j = 0; j < count; ++j) d += coef(j) * src(j)[k];
        dst[k] = d;
    }
}

void matmul_nn_acc(const float* g, const float* w, float* dx, std::size_t rows, std::size_t out,
                   std::size_t inner) {
    for (std::size_t r = 0; r < rows; ++r) {
        const float* gr = g + r * out;
        accumulate_rows(
            dx + r * inner, inner, out, [gr](std::size_t o) { return gr[o]; },
            [w, inner](std::size_t o) { return w + o * inner; });
    }
}

void matmul_tn_acc(const float* g, const float* x, float* dw, std::size_t rows, std::size_t out,
                   std::size_t inner) {
    for (std::size_t o = 0; o < out; ++o) {
        accumulate_rows(
            dw + o * inner, inner, rows, [g, o, out](std::size_t r) { return g[r * out + o]; },
            [x, inner](std::size_t r) { return x + r * inner; });
    }
}

float quant_sq_error(const float* v, const float* imp, std::size_t n, float scale, float inv_scale, float qmax) {
    const __m256 vs = _mm256_set1_ps(scale);
    const __m256 vinv = _mm256_set1_ps(inv_scale);
    const __m256 vmax = _mm256_set1_ps(qmax);
    const __m256 vmin = _mm256_set1_ps(-qmax);
    __m256 acc = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 x = _mm256_loadu_ps(v + i);
        __m256 q = _mm256_round_ps(_mm256_mul_ps(x, vinv), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
        q = _mm256_min_ps(_mm256_max_ps(q, vmin), vmax);
        const __m256 e = _mm256_fnmadd_ps(vs, q, x);
        const __m256 ee = _mm256_mul_ps(e, e);
        acc = imp ? _mm256_fmadd_ps(_mm256_loadu_ps(imp + i), ee, acc) : _mm256_add_ps(acc, ee);
    }
    float s = hsum(acc);
    for (; i < n; ++i) {
        const float q = std::clamp(std::nearbyint(v[i] * inv_scale), -qmax, qmax);
        const float e = v[i] - scale * q;
        s += (imp ? imp[i] : 1.0f) * e * e;
    }
    return s;
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{Isa::Avx2, dot,           axpy,          scale,         sum_squares,
                                   max_value, max_abs,       matmul_nt,     matmul_nn_acc, matmul_tn_acc,
                                   quant_sq_error};
    return table;
}

}  // namespace wlab::simd::detail
