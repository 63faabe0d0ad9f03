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

#include "wlab/model/generate.hpp"

#include <cmath>

#include "wlab/error.hpp"
#include "wlab/rng.hpp"

namespace wlab::model {

GenerateResult generate(const TinyModel& model, std::span<const TokenId> prompt, std::size_t max_new,
                        float temperature, std::uint64_t seed) {
    if (!(temperature >= 0.0f)) throw ConfigError("generate: temperature must be >= 0");
    const std::size_t ctx = model.config.context_length;
    GenerateResult res;
    std::vector<TokenId> seq(prompt.begin(), prompt.end());
    Rng rng(derive_seed(seed, "generate"));
    std::vector<double> probs(model.config.vocab_size);

    for (std::size_t step = 0; step < max_new; ++step) {
        std::span<const TokenId> window(seq);
        if (window.size() > ctx) {
            window = window.last(ctx);
            res.truncated = true;
        }
        if (window.empty()) throw ConfigError("generate: empty prompt");
        const Tensor logits = forward(model, window);
        const auto last = logits.row(window.size() - 1);
        TokenId next;
        if (temperature == 0.0f) {
            next = static_cast<TokenId>(nn::argmax(last));
        } else {
            double m = -INFINITY;
            for (float v : last) m = std::max(m, double(v) / temperature);
            double sum = 0.0;
            for (std::size_t i = 0; i < last.size(); ++i) {
                probs[i] = std::exp(double(last[i]) / temperature - m);
                sum += probs[i];
            }
            double u = rng.uniform() * sum;
            std::size_t pick = last.size() - 1;
            for (std::size_t i = 0; i < last.size(); ++i) {
                if (u < probs[i]) {
                    pick = i;
                    break;
                }
                u -= probs[i];
            }
            next = static_cast<TokenId>(pick);
        }
        seq.push_back(next);
        res.tokens.push_back(next);
    }
    return res;
}

}  // namespace wlab::model
