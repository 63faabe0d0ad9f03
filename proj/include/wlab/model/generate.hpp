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

#include <cstdint>
#include <span>
#include <vector>

#include "wlab/model/model.hpp"

namespace wlab::model {

struct GenerateResult {
    std::vector<TokenId> tokens;  // continuation only, prompt excluded
    bool truncated = false;       // context was cut from the left at least once
};

// temperature == 0: greedy argmax, ties to the lowest id.
// temperature > 0: sample from softmax(logits / temperature) with a seeded RNG.
GenerateResult generate(const TinyModel& model, std::span<const TokenId> prompt, std::size_t max_new,
                        float temperature, std::uint64_t seed);

}  // namespace wlab::model
