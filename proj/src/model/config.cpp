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

#include "wlab/model/config.hpp"

#include "wlab/error.hpp"

namespace wlab::model {

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::full_7b() {
    ModelConfig c;
    c.n_layers = 32;
    c.model_dim = 4096;
    c.n_heads = 32;
    c.n_kv_heads = 8;
    c.head_dim = 128;
    c.intermediate_size = 14336;
    c.vocab_size = 32000;
    c.context_length = 8192;
    c.sliding_window = 4096;
    c.rope_theta = 10000.0f;
    return c;
}

ModelConfig ModelConfig::preset(std::string_view name) {
    if (name == "desk") return desk();
    if (name == "full-7b") return full_7b();
    throw ConfigError("unknown model preset '" + std::string(name) + "' (expected desk or full-7b)");
}

void ModelConfig::validate() const {
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) throw ConfigError(std::string("model config: ") + name + " must be positive");
    };
    positive(n_layers, "n_layers");
    positive(model_dim, "model_dim");
    positive(n_heads, "n_heads");
    positive(n_kv_heads, "n_kv_heads");
    positive(head_dim, "head_dim");
    positive(intermediate_size, "intermediate_size");
    positive(vocab_size, "vocab_size");
    positive(context_length, "context_length");
    positive(sliding_window, "sliding_window");
    if (model_dim != n_heads * head_dim) {
        throw ConfigError("model config: model_dim (" + std::to_string(model_dim) + ") != n_heads * head_dim (" +
                          std::to_string(n_heads * head_dim) + ")");
    }
    if (context_length < sliding_window) throw ConfigError("model config: context_length must be >= sliding_window");
    if (!(norm_eps > 0.0f)) throw ConfigError("model config: norm_eps must be positive");
    attention().validate();
}

nn::AttentionConfig ModelConfig::attention() const {
    return nn::AttentionConfig{n_heads, n_kv_heads, head_dim, sliding_window, rope_theta};
}

std::uint64_t ModelConfig::parameter_count() const {
    const std::uint64_t d = model_dim, kv = n_kv_heads * head_dim, ff = intermediate_size, v = vocab_size;
    const std::uint64_t per_layer = d * d       // wq
                                    + 2 * kv * d  // wk, wv
                                    + d * d       // wo
                                    + 3 * ff * d  // gate, up, down
                                    + 2 * d;      // two norms
    return 2 * v * d + n_layers * per_layer + d;
}

}  // namespace wlab::model
