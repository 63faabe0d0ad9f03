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
#include <span>
#include <string_view>

#include "wlab/nn/ops.hpp"
#include "wlab/tensor.hpp"

namespace wlab::train {

using nn::TokenId;

enum class QualityTier { High, Medium, Low };

// Per-sample loss weights by annotation tier: 1.0 / 0.7 / 0.5.
float weight_for_quality(QualityTier tier);
// "high" | "medium" | "low"; anything else is a DataError.
QualityTier parse_quality(std::string_view label);

struct SampleLoss {
    double loss = 0.0;            // w * sum over masked positions of -log p(target)
    std::size_t token_count = 0;  // masked positions
};

// Weighted instruction cross-entropy for one sample. Row t of `logits` is
// scored against targets[t] when mask[t] is set. Throws DataError when the
// mask selects nothing and ConfigError when weight is outside (0, 1].
SampleLoss wicel_loss(const Tensor& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                      float weight);

// dlogits += scale * weight * (softmax - onehot) on masked rows. With
// scale = 1 / batch_tokens this is the gradient of the batch mean.
void wicel_loss_backward(const Tensor& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                         float weight, double scale, Tensor& dlogits);

// Total weighted loss divided by total masked tokens.
double reduce_batch(std::span<const SampleLoss> samples);

}  // namespace wlab::train
