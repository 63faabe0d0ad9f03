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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wlab/nn/ops.hpp"

namespace wlab::train {

using nn::TokenId;

struct InstructionSample {
    std::vector<TokenId> tokens;
    std::vector<std::uint8_t> loss_mask;  // 1 = token is scored
    float weight = 1.0f;

    // Throws DataError: length mismatch, weight outside (0, 1], ids outside
    // the vocabulary, or no scored token after position 0 (the first token
    // has no left context to be predicted from).
    void validate(std::size_t vocab_size) const;
    std::size_t scored_tokens() const;  // masked positions t >= 1
};

// Chat template over a byte-level vocabulary:
//   <bos> <user> prompt-bytes <assistant> response-bytes <eos>
// Only the response bytes are scored; prompt and control tokens are masked out.
struct ChatTemplate {
    static constexpr TokenId kPad = 0;
    static constexpr TokenId kBos = 1;
    static constexpr TokenId kEos = 2;
    static constexpr TokenId kUser = 3;
    static constexpr TokenId kAssistant = 4;
    static constexpr TokenId kFirstByte = 5;
    static constexpr std::size_t kMinVocab = 5 + 256;

    static TokenId byte_token(unsigned char b) { return kFirstByte + static_cast<TokenId>(b); }
    static std::vector<TokenId> encode_bytes(std::string_view text);
    static std::string decode(std::span<const TokenId> ids);  // control tokens rendered as <bos> etc.

    static InstructionSample render(std::string_view prompt, std::string_view response, float weight);
};

// Parse one JSON line. Two shapes are accepted:
//   {"prompt": str, "response": str, "quality": "high"|"medium"|"low"}
//   {"tokens": [int], "mask": [0|1], "weight": float}
InstructionSample parse_sample_line(std::string_view line, std::size_t vocab_size);

// Whole file; errors carry the 1-based line number. Blank lines are skipped.
std::vector<InstructionSample> load_dataset(const std::filesystem::path& path, std::size_t vocab_size);

}  // namespace wlab::train
