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
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wlab/nn/ops.hpp"

namespace wlab::model {

struct ModelConfig {
    std::size_t n_layers = 4;
    std::size_t model_dim = 128;
    std::size_t n_heads = 8;
    std::size_t n_kv_heads = 2;
    std::size_t head_dim = 16;
    std::size_t intermediate_size = 448;
    std::size_t vocab_size = 512;
    std::size_t context_length = 256;
    std::size_t sliding_window = 128;
    float rope_theta = 10000.0f;
    float norm_eps = 1e-5f;

    // Desk-scale default: 4 layers, d=128, 8 query / 2 kv heads.
    static ModelConfig desk();
    // Full-size 7B architecture (32 layers, d=4096, 32/8 heads, 14336 FFN,
    // 32000 vocab, 8192 context, 4096 window). Only ever used symbolically.
    static ModelConfig full_7b();
    // "desk" or "full-7b"; throws ConfigError otherwise.
    static ModelConfig preset(std::string_view name);

    void validate() const;
    nn::AttentionConfig attention() const;
    std::uint64_t parameter_count() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace wlab::model
