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

namespace wlab::train {

struct ScheduleConfig {
    double base_lr = 3e-5;
    double min_lr = 2e-5;
    std::size_t warmup_iters = 2000;
    std::size_t total_iters = 17350;
    std::size_t baseline_batch_tokens = 4096;  // BS in the adaptive rule
    bool alr_enabled = false;

    void validate() const;
};

// lr * sqrt(batch_tokens / baseline_tokens)
double adaptive_lr(double lr, std::size_t batch_tokens, std::size_t baseline_tokens);

// Linear warmup from 0 to base_lr, cosine decay to min_lr at total_iters,
// constant min_lr afterwards.
double cosine_schedule(std::size_t iter, const ScheduleConfig& cfg);

// The rate actually used at `iter`: the schedule, rescaled by adaptive_lr
// when enabled.
double effective_lr(std::size_t iter, std::size_t batch_tokens, const ScheduleConfig& cfg);

}  // namespace wlab::train
