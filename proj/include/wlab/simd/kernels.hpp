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
#include <string_view>
#include <vector>

// Data-parallel float32 inner loops used by the tensor ops, the optimizer and
// the quantizer. Each ISA provides the same table; the scalar table is the
// reference that the vectorized ones are equivalence-tested against.
namespace wlab::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
    Isa isa;

    float (*dot)(const float* a, const float* b, std::size_t n);
    // y += a * x
    void (*axpy)(float a, const float* x, float* y, std::size_t n);
    void (*scale)(float a, float* x, std::size_t n);
    float (*sum_squares)(const float* x, std::size_t n);
    float (*max_value)(const float* x, std::size_t n);
    float (*max_abs)(const float* x, std::size_t n);

    // y[r, o] = sum_k x[r, k] * w[o, k]   (y = x W^T, W row-major [out, inner])
    // With accumulate, the product is added to y instead of overwriting it.
    void (*matmul_nt)(const float* x, const float* w, float* y, std::size_t rows, std::size_t inner,
                      std::size_t out, bool accumulate);
    // dx[r, k] += sum_o g[r, o] * w[o, k]   (dx += G W)
    void (*matmul_nn_acc)(const float* g, const float* w, float* dx, std::size_t rows, std::size_t out,
                          std::size_t inner);
    // dw[o, k] += sum_r g[r, o] * x[r, k]   (dW += G^T X)
    void (*matmul_tn_acc)(const float* g, const float* x, float* dw, std::size_t rows, std::size_t out,
                          std::size_t inner);

    // sum_i imp[i] * (v[i] - scale * clamp(nearbyint(v[i] * inv_scale), -qmax, qmax))^2
    // imp == nullptr means unit weights.
    float (*quant_sq_error)(const float* v, const float* imp, std::size_t n, float scale, float inv_scale,
                            float qmax);
};

// The table selected for this process. Chosen on first use: the WLAB_SIMD
// environment variable ("scalar", "avx2", "neon") if set and supported,
// otherwise the widest ISA the CPU reports.
const KernelTable& kernels();

const KernelTable& scalar_kernels();

// Tables that are both compiled in and supported by this CPU, scalar first.
std::vector<const KernelTable*> available_kernels();

// Switch the active table. Returns false (and changes nothing) when the ISA is
// unavailable. Not thread-safe with respect to concurrent kernel use.
bool set_isa(Isa isa);
Isa active_isa();

}  // namespace wlab::simd
