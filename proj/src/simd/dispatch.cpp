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

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_internal.hpp"

namespace wlab::simd {

namespace {

bool cpu_supports(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(WLAB_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(WLAB_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable* table_for(Isa isa) {
    if (!cpu_supports(isa)) return nullptr;
    switch (isa) {
        case Isa::Scalar:
            return &detail::scalar_table();
        case Isa::Avx2:
#if defined(WLAB_HAVE_AVX2)
            return &detail::avx2_table();
#else
            return nullptr;
#endif
        case Isa::Neon:
#if defined(WLAB_HAVE_NEON)
            return &detail::neon_table();
#else
            return nullptr;
#endif
    }
    return nullptr;
}

const KernelTable* pick_default() {
    if (const char* env = std::getenv("WLAB_SIMD")) {
        const std::string want(env);
        for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
            if (want == isa_name(isa)) {
                if (const auto* t = table_for(isa)) return t;
            }
        }
    }
    for (Isa isa : {Isa::Avx2, Isa::Neon}) {
        if (const auto* t = table_for(isa)) return t;
    }
    return &detail::scalar_table();
}

std::atomic<const KernelTable*>& active() {
    static std::atomic<const KernelTable*> table{pick_default()};
    return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return "scalar";
        case Isa::Avx2:
            return "avx2";
        case Isa::Neon:
            return "neon";
    }
    return "unknown";
}

const KernelTable& kernels() { return *active().load(std::memory_order_relaxed); }

const KernelTable& scalar_kernels() { return detail::scalar_table(); }

std::vector<const KernelTable*> available_kernels() {
    std::vector<const KernelTable*> out;
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
        if (const auto* t = table_for(isa)) out.push_back(t);
    }
    return out;
}

bool set_isa(Isa isa) {
    const auto* t = table_for(isa);
    if (!t) return false;
    active().store(t, std::memory_order_relaxed);
    return true;
}

Isa active_isa() { return kernels().isa; }

}  // namespace wlab::simd
