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

#include "wlab/quant/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "wlab/error.hpp"
#include "wlab/numeric.hpp"
#include "wlab/parallel.hpp"

namespace wlab::quant {

namespace {

std::vector<double> log_softmax(std::span<const float> logits) {
    double m = -INFINITY;
    for (float v : logits) m = std::max(m, static_cast<double>(v));
    double s = 0;
    for (float v : logits) s += std::exp(static_cast<double>(v) - m);
    const double lse = m + std::log(s);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = static_cast<double>(logits[i]) - lse;
    return out;
}

void check_target(std::size_t vocab, nn::TokenId target) {
    if (target < 0 || static_cast<std::size_t>(target) >= vocab) {
        throw ShapeError("fidelity: target id " + std::to_string(target) + " outside vocabulary of " + std::to_string(vocab));
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

PositionStats compare_logits(std::span<const float> ref_logits, std::span<const float> q_logits, nn::TokenId target) {
    if (ref_logits.size() != q_logits.size()) throw ShapeError("fidelity: logit rows differ in size");
    check_target(ref_logits.size(), target);
    const auto lr = log_softmax(ref_logits);
    const auto lq = log_softmax(q_logits);
    PositionStats s;
    double kl = 0;
    for (std::size_t i = 0; i < lr.size(); ++i) kl += std::exp(lr[i]) * (lr[i] - lq[i]);
    s.kl = std::max(0.0, kl);  // clears rounding residue below zero
    s.nll_ref = -lr[target];
    s.nll_q = -lq[target];
    s.dp = std::exp(lq[target]) - std::exp(lr[target]);
    s.same_top = nn::argmax(ref_logits) == nn::argmax(q_logits);
    return s;
}

PositionStats compare_probabilities(std::span<const double> p_ref, std::span<const double> p_q, nn::TokenId target) {
    if (p_ref.size() != p_q.size()) throw ShapeError("fidelity: distributions differ in size");
    check_target(p_ref.size(), target);
    PositionStats s;
    double kl = 0;
    for (std::size_t i = 0; i < p_ref.size(); ++i) {
        if (p_ref[i] > 0) kl += p_ref[i] * (std::log(p_ref[i]) - std::log(p_q[i]));
    }
    s.kl = std::max(0.0, kl);
    s.nll_ref = -std::log(p_ref[target]);
    s.nll_q = -std::log(p_q[target]);
    s.dp = p_q[target] - p_ref[target];
    auto top = [](std::span<const double> p) { return std::max_element(p.begin(), p.end()) - p.begin(); };
    s.same_top = top(p_ref) == top(p_q);
    return s;
}

FidelityReport summarize(std::span<const PositionStats> stats) {
    if (stats.empty()) throw DataError("fidelity: no positions to summarize");
    const std::size_t n = stats.size();
    std::vector<double> nll_ref(n), nll_q(n), kl(n), dp(n), dp2(n), same(n);
    for (std::size_t i = 0; i < n; ++i) {
        nll_ref[i] = stats[i].nll_ref;
        nll_q[i] = stats[i].nll_q;
        kl[i] = stats[i].kl;
        dp[i] = stats[i].dp;
        dp2[i] = stats[i].dp * stats[i].dp;
        same[i] = stats[i].same_top ? 1.0 : 0.0;
    }
    const double dn = static_cast<double>(n);
    FidelityReport r;
    r.positions = n;
    r.ppl_ref = std::exp(pairwise_sum(nll_ref) / dn);
    r.ppl_q = std::exp(pairwise_sum(nll_q) / dn);
    r.delta_ppl = r.ppl_q - r.ppl_ref;
    r.kld_mean = pairwise_sum(kl) / dn;
    r.mean_dp = 100.0 * pairwise_sum(dp) / dn;
    r.rms_dp = 100.0 * std::sqrt(pairwise_sum(dp2) / dn);
    r.same_top_p = 100.0 * pairwise_sum(same) / dn;
    return r;
}

FidelityReport fidelity(const model::TinyModel& reference, const model::TinyModel& quantized,
                        std::span<const nn::TokenId> stream, std::size_t jobs) {
    if (reference.config.vocab_size != quantized.config.vocab_size) {
        throw FormatError("fidelity: vocabulary sizes differ (" + std::to_string(reference.config.vocab_size) + " vs " +
                          std::to_string(quantized.config.vocab_size) + ")");
    }
    if (stream.size() < 2) throw DataError("fidelity: evaluation stream needs at least two tokens");
    const std::size_t ctx = std::min(reference.config.context_length, quantized.config.context_length);
    const std::size_t positions = stream.size() - 1;
    const std::size_t windows = (positions + ctx - 1) / ctx;
    std::vector<std::vector<PositionStats>> per_window(windows);
    parallel_for(windows, jobs, [&](std::size_t w) {
        const std::size_t start = w * ctx;
        const std::size_t len = std::min(ctx, positions - start);
        const auto inputs = stream.subspan(start, len);
        const Tensor lr = model::forward(reference, inputs);
        const Tensor lq = model::forward(quantized, inputs);
        auto& out = per_window[w];
        out.reserve(len);
        for (std::size_t i = 0; i < len; ++i) out.push_back(compare_logits(lr.row(i), lq.row(i), stream[start + i + 1]));
    });
    std::vector<PositionStats> all;
    all.reserve(positions);
    for (auto& w : per_window) all.insert(all.end(), w.begin(), w.end());
    return summarize(all);
}

std::string fidelity_csv_header() { return "scheme,imatrix,size_GiB,PPL,ΔPPL,KLD,mean_Δp,rms_Δp,same_top_p\n"; }

std::string fidelity_csv_row(const FidelityReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%s,%.9f,%.6f,%.6f,%.8f,%.6f,%.6f,%.4f\n", r.scheme.c_str(), r.imatrix ? "Y" : "N",
                  r.size_gib(), r.ppl_q, r.delta_ppl, r.kld_mean, r.mean_dp, r.rms_dp, r.same_top_p);
    return buf;
}

std::vector<FidelityReport> parse_fidelity_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line + "\n" != fidelity_csv_header()) {
        throw DataError("fidelity CSV: unexpected header");
    }
    std::vector<FidelityReport> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 9) throw DataError("fidelity CSV: expected 9 columns in '" + line + "'");
        FidelityReport r;
        try {
            r.scheme = cells[0];
            r.imatrix = cells[1] == "Y";
            r.size_bytes = static_cast<std::uint64_t>(std::llround(std::stod(cells[2]) * 1024.0 * 1024.0 * 1024.0));
            r.ppl_q = std::stod(cells[3]);
            r.delta_ppl = std::stod(cells[4]);
            r.ppl_ref = r.ppl_q - r.delta_ppl;
            r.kld_mean = std::stod(cells[5]);
            r.mean_dp = std::stod(cells[6]);
            r.rms_dp = std::stod(cells[7]);
            r.same_top_p = std::stod(cells[8]);
        } catch (const std::exception&) {
            throw DataError("fidelity CSV: bad number in '" + line + "'");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace wlab::quant
