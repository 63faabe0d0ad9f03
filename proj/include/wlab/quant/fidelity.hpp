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

// Comparison of reference and quantized next-token distributions at one position.
struct PositionStats {
    double nll_ref = 0;  // -log p_ref(target)
    double nll_q = 0;
    double kl = 0;       // KL(p_ref || p_q), nats
    double dp = 0;       // p_q(target) - p_ref(target)
    bool same_top = false;
};

PositionStats compare_logits(std::span<const float> ref_logits, std::span<const float> q_logits, nn::TokenId target);
PositionStats compare_probabilities(std::span<const double> p_ref, std::span<const double> p_q, nn::TokenId target);

struct FidelityReport {
    std::string scheme = "F32";
    bool imatrix = false;
    std::uint64_t size_bytes = 0;
    std::size_t positions = 0;
    double ppl_ref = 0;
    double ppl_q = 0;
    double delta_ppl = 0;    // ppl_q - ppl_ref
    double kld_mean = 0;
    double mean_dp = 0;      // percentage points
    double rms_dp = 0;       // percentage points
    double same_top_p = 0;   // percent of positions

    double size_gib() const { return static_cast<double>(size_bytes) / (1024.0 * 1024.0 * 1024.0); }
};

// Order-independent reduction (pairwise sums) of per-position statistics.
FidelityReport summarize(std::span<const PositionStats> stats);

// Teacher-forced evaluation over the stream. The stream is cut into windows of
// the context length that overlap by one token, so every position after the
// first is predicted exactly once. Windows are evaluated on up to `jobs`
// threads. Throws FormatError when the vocabularies differ and DataError when
// the stream has fewer than two tokens.
FidelityReport fidelity(const model::TinyModel& reference, const model::TinyModel& quantized,
                        std::span<const nn::TokenId> stream, std::size_t jobs = 1);

// Columns: scheme, imatrix, size_GiB, PPL, ΔPPL, KLD, mean_Δp, rms_Δp, same_top_p.
std::string fidelity_csv_header();
std::string fidelity_csv_row(const FidelityReport& r);
std::vector<FidelityReport> parse_fidelity_csv(const std::string& text);  // throws DataError

}  // namespace wlab::quant
