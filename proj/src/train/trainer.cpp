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

#include "wlab/train/trainer.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "wlab/error.hpp"
#include "wlab/rng.hpp"
#include "wlab/train/loss.hpp"

namespace wlab::train {

void TrainConfig::validate() const {
    if (epochs == 0) throw ConfigError("train: epochs must be positive");
    if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
    schedule.validate();
    optimizer.validate();
}

std::size_t TrainConfig::planned_iters(std::size_t n_samples) const {
    const std::size_t per_epoch = (n_samples + batch_size - 1) / batch_size;
    const std::size_t all = per_epoch * epochs;
    return max_iters ? std::min(all, max_iters) : all;
}

std::string TrainReport::to_csv() const {
    std::ostringstream os;
    os << "iter,tokens,loss,accuracy,lr\n";
    char buf[160];
    for (const auto& r : iterations) {
        std::snprintf(buf, sizeof buf, "%zu,%llu,%.9g,%.9g,%.9g\n", r.iter, static_cast<unsigned long long>(r.tokens_seen),
                      r.loss, r.accuracy, r.lr);
        os << buf;
    }
    return os.str();
}

SampleView shifted(const InstructionSample& s) {
    if (s.tokens.size() < 2) throw DataError("sample shorter than two tokens");
    const std::size_t n = s.tokens.size() - 1;
    return SampleView{std::span<const TokenId>(s.tokens).first(n), std::span<const TokenId>(s.tokens).subspan(1),
                      std::span<const std::uint8_t>(s.loss_mask).subspan(1)};
}

TrainReport train(model::TinyModel& model, const std::vector<InstructionSample>& data, const TrainConfig& cfg,
                  const IterationCallback& on_iteration) {
    cfg.validate();
    if (data.empty()) throw DataError("train: empty dataset");
    for (const auto& s : data) {
        s.validate(model.config.vocab_size);
        if (s.tokens.size() > model.config.context_length + 1) {
            throw DataError("train: sample of " + std::to_string(s.tokens.size()) + " tokens exceeds context length");
        }
    }

    auto state = OptimizerState::create(model.config, cfg.optimizer);
    auto grads = model::Parameters::zeros(model.config);
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
    std::vector<std::size_t> order(data.size());

    TrainReport report;
    const std::size_t total = cfg.planned_iters(data.size());
    std::uint64_t tokens_seen = 0;
    std::size_t iter = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs && iter < total; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size() && iter < total; start += cfg.batch_size) {
            ++iter;
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);

            std::size_t batch_tokens = 0;
            for (std::size_t b = start; b < end; ++b) batch_tokens += data[order[b]].scored_tokens();
            const double inv_tokens = 1.0 / static_cast<double>(batch_tokens);

            grads.visit([](const std::string&, Tensor& t) { t.fill(0.0f); });
            double weighted = 0.0;
            std::size_t correct = 0;
            for (std::size_t b = start; b < end; ++b) {
                const auto& s = data[order[b]];
                const auto view = shifted(s);
                model::ForwardCache cache;
                const Tensor logits = model::forward(model, view.inputs, &cache);
                weighted += wicel_loss(logits, view.targets, view.mask, s.weight).loss;
                for (std::size_t t = 0; t < view.targets.size(); ++t) {
                    if (view.mask[t] && nn::argmax(logits.row(t)) == static_cast<std::size_t>(view.targets[t])) ++correct;
                }
                Tensor dlogits(logits.shape());
                wicel_loss_backward(logits, view.targets, view.mask, s.weight, inv_tokens, dlogits);
                model::backward(model, cache, dlogits, grads);
                tokens_seen += s.tokens.size();
            }

            IterationRecord rec;
            rec.iter = iter;
            rec.tokens_seen = tokens_seen;
            rec.batch_tokens = batch_tokens;
            rec.loss = weighted * inv_tokens;
            rec.accuracy = static_cast<double>(correct) * inv_tokens;
            rec.lr = effective_lr(iter, batch_tokens, cfg.schedule);
            rec.grad_norm = adamw_step(model.params, grads, state, rec.lr).grad_norm;
            report.iterations.push_back(rec);
            if (on_iteration) on_iteration(rec);
        }
    }
    return report;
}

double sft_objective(const model::TinyModel& model, const std::vector<InstructionSample>& data) {
    if (data.empty()) throw DataError("sft_objective: empty dataset");
    double loglik = 0.0;
    std::size_t tokens = 0;
    for (const auto& s : data) {
        const auto view = shifted(s);
        const Tensor logits = model::forward(model, view.inputs);
        for (std::size_t t = 0; t < view.targets.size(); ++t) {
            if (!view.mask[t]) continue;
            loglik -= nn::cross_entropy_row(logits.row(t), static_cast<std::size_t>(view.targets[t]));
            ++tokens;
        }
    }
    if (tokens == 0) throw DataError("sft_objective: no scored tokens");
    return loglik / static_cast<double>(tokens);
}

}  // namespace wlab::train
