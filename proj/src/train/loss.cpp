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

#include "wlab/train/loss.hpp"

#include <string>

#include "wlab/error.hpp"

namespace wlab::train {

float weight_for_quality(QualityTier tier) {
    switch (tier) {
        case QualityTier::High:
            return 1.0f;
        case QualityTier::Medium:
            return 0.7f;
        case QualityTier::Low:
            return 0.5f;
    }
    throw DataError("unknown quality tier");
}

QualityTier parse_quality(std::string_view label) {
    if (label == "high") return QualityTier::High;
    if (label == "medium") return QualityTier::Medium;
    if (label == "low") return QualityTier::Low;
    throw DataError("unknown quality tier '" + std::string(label) + "' (expected high, medium or low)");
}

namespace {

void check_inputs(const Tensor& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                  float weight) {
    if (!(weight > 0.0f && weight <= 1.0f)) throw ConfigError("wicel_loss: weight " + std::to_string(weight) + " outside (0, 1]");
    if (logits.rank() != 2) throw ShapeError("wicel_loss: logits must be [seq, vocab]");
    if (targets.size() != logits.dim(0) || mask.size() != logits.dim(0)) {
        throw ShapeError("wicel_loss: " + std::to_string(logits.dim(0)) + " logit rows, " + std::to_string(targets.size()) +
                         " targets, " + std::to_string(mask.size()) + " mask entries");
    }
}

}  // namespace

SampleLoss wicel_loss(const Tensor& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                      float weight) {
    check_inputs(logits, targets, mask, weight);
    SampleLoss out;
    double ce = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (!mask[t]) continue;
        ce += nn::cross_entropy_row(logits.row(t), static_cast<std::size_t>(targets[t]));
        ++out.token_count;
    }
    if (out.token_count == 0) throw DataError("wicel_loss: sample has no masked tokens");
    out.loss = static_cast<double>(weight) * ce;
    return out;
}

void wicel_loss_backward(const Tensor& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                         float weight, double scale, Tensor& dlogits) {
    check_inputs(logits, targets, mask, weight);
    if (dlogits.shape() != logits.shape()) throw ShapeError("wicel_loss_backward: dlogits shape mismatch");
    const double s = scale * static_cast<double>(weight);
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (!mask[t]) continue;
        nn::cross_entropy_row_backward(logits.row(t), static_cast<std::size_t>(targets[t]), s, dlogits.row(t));
    }
}

double reduce_batch(std::span<const SampleLoss> samples) {
    double total = 0.0;
    std::size_t tokens = 0;
    for (const auto& s : samples) {
        total += s.loss;
        tokens += s.token_count;
    }
    if (tokens == 0) throw DataError("reduce_batch: batch has no masked tokens");
    return total / static_cast<double>(tokens);
}

}  // namespace wlab::train
