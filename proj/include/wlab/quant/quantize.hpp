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
#include <string>
#include <vector>

#include "wlab/model/model.hpp"

namespace wlab::quant {

class ImportanceMatrix;

// Symmetric block quantization with one float32 scale per block. Labeled Q<bits>.
struct QuantScheme {
    int bits = 8;
    std::size_t block_size = 32;
    bool imatrix_enabled = false;

    void validate() const;  // bits in [2, 8], block_size > 0
    int qmax() const { return (1 << (bits - 1)) - 1; }
    std::string label() const { return "Q" + std::to_string(bits); }
};

struct QuantizedBlock {
    std::vector<std::int8_t> codes;
    float scale = 0.0f;
};

// Without importance, scale = max|v| / qmax. With importance, the scale
// minimizes sum_i imp_i (v_i - scale * q_i)^2 over multipliers in
// [0.5, 1.2] of that value: a coarse grid locates the basin, golden-section
// search refines it, and the plain max-abs scale is kept when it does
// better. Blocks whose importance is all zero fall back to the plain scale.
QuantizedBlock quantize_block(std::span<const float> values, int bits, std::span<const float> importance = {});
void dequantize_block(const QuantizedBlock& block, std::span<float> out);

// sum_i imp_i (v_i - scale * clamp(round(v_i / scale)))^2, in double.
double weighted_quant_error(std::span<const float> values, std::span<const float> importance, float scale, int bits);

// Bytes for a row-major [rows, cols] tensor split into blocks along each row:
// every block stores bits per value plus a 32-bit scale.
std::uint64_t quantized_tensor_bytes(std::size_t rows, std::size_t cols, const QuantScheme& scheme);

// Whole model: quantized linear and embedding weights plus float32 norm gains.
std::uint64_t size_estimate(const model::ModelConfig& config, const QuantScheme& scheme);

struct QuantizedModel {
    model::TinyModel model;  // dequantized weights, ready for the float forward pass
    std::uint64_t size_bytes = 0;
};

// Quantize every linear and embedding weight in blocks along its rows and
// write back the dequantized values. Norm gains stay untouched. Importance is
// looked up per weight (one value per input column) when the scheme asks for
// it; weights without an entry, such as the token embedding, use the plain
// scale. Throws ShapeError when an importance vector does not match.
QuantizedModel quantize_model(const model::TinyModel& model, const QuantScheme& scheme,
                              const ImportanceMatrix* imatrix = nullptr, std::size_t jobs = 1);

}  // namespace wlab::quant
