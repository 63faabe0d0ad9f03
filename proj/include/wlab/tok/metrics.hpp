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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wlab/tok/bpe.hpp"

namespace wlab::tok {

// Exact ratio of two counts. value() is the double nearest to num/den; the
// identities below hold exactly on the integer form.
struct Ratio {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Ratio&, const Ratio&) = default;
};

struct TokenizerMetrics {
    std::size_t token_count = 0;
    std::size_t char_count = 0;  // Unicode scalar values
    std::size_t word_count = 0;  // whitespace-delimited
    Ratio chars_per_token;       // char_count / token_count
    Ratio tokens_per_word;       // token_count / word_count
};

std::size_t count_words(std::string_view text);

// Throws DataError when there are no tokens or no words.
TokenizerMetrics metrics_from_counts(std::size_t tokens, std::size_t chars, std::size_t words);
TokenizerMetrics metrics(const BpeVocab& vocab, std::string_view text);

struct MetricsRow {
    std::string tokenizer;
    TokenizerMetrics metrics;
};

// "tokenizer,tokens,CpT,TpW" with ratios rounded to two decimals.
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string format_2dp(double v);

// Published figures for one tokenizer on one text: a token count and the two
// ratios as printed (two decimals).
struct PublishedMetrics {
    std::size_t tokens;
    double cpt;
    double tpw;
};

// The character and word counts compatible with a published row, i.e. those
// whose ratios round to the printed values. Empty when none exist.
struct CountRange {
    std::size_t lo = 0, hi = 0;  // inclusive
    bool empty() const { return hi < lo; }
};
CountRange compatible_char_counts(const PublishedMetrics& row);
CountRange compatible_word_counts(const PublishedMetrics& row);

// True when measured metrics reproduce the published row after rounding.
bool matches_published(const TokenizerMetrics& m, const PublishedMetrics& row);

}  // namespace wlab::tok
