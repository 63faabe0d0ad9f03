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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wlab/model/model.hpp"
#include "wlab/train/adamw.hpp"
#include "wlab/train/dataset.hpp"
#include "wlab/train/schedule.hpp"

namespace wlab::train {

struct TrainConfig {
    std::size_t epochs = 1;
    std::size_t batch_size = 8;
    std::size_t max_iters = 0;  // 0 = run every epoch to completion
    std::uint64_t seed = 0;
    ScheduleConfig schedule;
    AdamWConfig optimizer;

    void validate() const;
    // Iterations the run will perform for a dataset of n samples.
    std::size_t planned_iters(std::size_t n_samples) const;
};

struct IterationRecord {
    std::size_t iter = 0;            // 1-based
    std::uint64_t tokens_seen = 0;   // cumulative input tokens
    std::size_t batch_tokens = 0;    // scored tokens in this batch (T)
    double loss = 0.0;               // weighted CE / scored tokens
    double accuracy = 0.0;           // top-1 on scored positions
    double lr = 0.0;                 // rate handed to the optimizer
    double grad_norm = 0.0;
};

struct TrainReport {
    std::vector<IterationRecord> iterations;

    // "iter,tokens,loss,accuracy,lr"
    std::string to_csv() const;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

// Mini-batch training with a per-epoch seeded shuffle. Each step: weighted
// masked CE averaged over the batch's scored tokens, backward, global-norm
// clipping, AdamW at the (optionally adaptive) cosine-scheduled rate.
TrainReport train(model::TinyModel& model, const std::vector<InstructionSample>& data, const TrainConfig& cfg,
                  const IterationCallback& on_iteration = {});

// Mean log-likelihood per scored token (weights ignored): the SFT objective.
double sft_objective(const model::TinyModel& model, const std::vector<InstructionSample>& data);

// Forward one sample: logits for positions 0..n-2 against targets tokens[1..].
struct SampleView {
    std::span<const TokenId> inputs;
    std::span<const TokenId> targets;
    std::span<const std::uint8_t> mask;
};
SampleView shifted(const InstructionSample& s);

}  // namespace wlab::train
