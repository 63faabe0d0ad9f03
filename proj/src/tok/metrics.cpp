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

#include "wlab/tok/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "wlab/error.hpp"
#include "wlab/utf8.hpp"

namespace wlab::tok {

namespace {

bool is_ws(char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0xA0;
}

bool rounds_to(double value, double printed) { return format_2dp(value) == format_2dp(printed); }

}  // namespace

std::size_t count_words(std::string_view text) {
    std::size_t words = 0;
    bool in_word = false;
    for (char32_t c : utf8::decode(text)) {
        const bool ws = is_ws(c);
        if (!ws && !in_word) ++words;
        in_word = !ws;
    }
    return words;
}

TokenizerMetrics metrics_from_counts(std::size_t tokens, std::size_t chars, std::size_t words) {
    if (tokens == 0) throw DataError("tokenizer metrics: no tokens");
    if (words == 0) throw DataError("tokenizer metrics: text has no words");
    TokenizerMetrics m;
    m.token_count = tokens;
    m.char_count = chars;
    m.word_count = words;
    m.chars_per_token = {chars, tokens};
    m.tokens_per_word = {tokens, words};
    return m;
}

TokenizerMetrics metrics(const BpeVocab& vocab, std::string_view text) {
    if (text.empty()) throw DataError("tokenizer metrics: empty text");
    const auto tokens = tokenize(vocab, text).size();
    return metrics_from_counts(tokens, utf8::count_scalars(text), count_words(text));
}

std::string format_2dp(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::string out = "tokenizer,tokens,CpT,TpW\n";
    for (const auto& r : rows) {
        out += r.tokenizer + ',' + std::to_string(r.metrics.token_count) + ',' +
               format_2dp(r.metrics.chars_per_token.value()) + ',' + format_2dp(r.metrics.tokens_per_word.value()) + '\n';
    }
    return out;
}

CountRange compatible_char_counts(const PublishedMetrics& row) {
    const double t = static_cast<double>(row.tokens);
    const auto lo = static_cast<std::size_t>(std::floor((row.cpt - 0.01) * t));
    const auto hi = static_cast<std::size_t>(std::ceil((row.cpt + 0.01) * t));
    CountRange r{1, 0};
    for (std::size_t c = lo; c <= hi; ++c) {
        if (!rounds_to(static_cast<double>(c) / t, row.cpt)) continue;
        if (r.empty()) r.lo = c;
        r.hi = c;
    }
    return r;
}

CountRange compatible_word_counts(const PublishedMetrics& row) {
    const double t = static_cast<double>(row.tokens);
    const auto lo = static_cast<std::size_t>(std::max(1.0, std::floor(t / (row.tpw + 0.01))));
    const auto hi = static_cast<std::size_t>(std::ceil(t / std::max(row.tpw - 0.01, 1e-9)));
    CountRange r{1, 0};
    for (std::size_t w = lo; w <= hi; ++w) {
        if (!rounds_to(t / static_cast<double>(w), row.tpw)) continue;
        if (r.empty()) r.lo = w;
        r.hi = w;
    }
    return r;
}

bool matches_published(const TokenizerMetrics& m, const PublishedMetrics& row) {
    return m.token_count == row.tokens && rounds_to(m.chars_per_token.value(), row.cpt) &&
           rounds_to(m.tokens_per_word.value(), row.tpw);
}

}  // namespace wlab::tok
