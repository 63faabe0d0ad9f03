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

#include "wlab/train/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "wlab/error.hpp"

namespace wlab::train {

void ScheduleConfig::validate() const {
    if (!(min_lr > 0.0) || !(min_lr <= base_lr)) throw ConfigError("schedule: require 0 < min_lr <= base_lr");
    if (warmup_iters >= total_iters) {
        throw ConfigError("schedule: warmup_iters (" + std::to_string(warmup_iters) + ") must be < total_iters (" +
                          std::to_string(total_iters) + ")");
    }
    if (baseline_batch_tokens == 0) throw ConfigError("schedule: baseline_batch_tokens must be positive");
}

double adaptive_lr(double lr, std::size_t batch_tokens, std::size_t baseline_tokens) {
    if (batch_tokens == 0 || baseline_tokens == 0) throw ConfigError("adaptive_lr: token counts must be positive");
    return lr * std::sqrt(static_cast<double>(batch_tokens) / static_cast<double>(baseline_tokens));
}

double cosine_schedule(std::size_t iter, const ScheduleConfig& cfg) {
    if (iter < cfg.warmup_iters) {
        return cfg.base_lr * static_cast<double>(iter) / static_cast<double>(cfg.warmup_iters);
    }
    if (iter >= cfg.total_iters) return cfg.min_lr;
    const double progress =
        static_cast<double>(iter - cfg.warmup_iters) / static_cast<double>(cfg.total_iters - cfg.warmup_iters);
    // Written as a decrement from base_lr so progress = 0 returns base_lr exactly.
    return cfg.base_lr - 0.5 * (cfg.base_lr - cfg.min_lr) * (1.0 - std::cos(std::numbers::pi * progress));
}

double effective_lr(std::size_t iter, std::size_t batch_tokens, const ScheduleConfig& cfg) {
    const double lr = cosine_schedule(iter, cfg);
    return cfg.alr_enabled ? adaptive_lr(lr, batch_tokens, cfg.baseline_batch_tokens) : lr;
}

}  // namespace wlab::train
