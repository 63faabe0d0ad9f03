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

#include <doctest.h>

#include "wlab/error.hpp"
#include "wlab/rng.hpp"
#include "wlab/tok/bpe.hpp"
#include "wlab/tok/metrics.hpp"

using namespace wlab;
using namespace wlab::tok;

TEST_CASE("hand-counted examples") {
    const BpeVocab v({" ", "a", "b"}, {{"a", "a", "aa"}, {"aa", "a", "aaa"}, {"b", "b", "bb"}, {"bb", "b", "bbb"},
                                       {" ", "bbb", " bbb"}});
    CHECK(tokenize(v, "aaa bbb") == std::vector<std::string>{"aaa", " bbb"});
    const auto m = metrics(v, "aaa bbb");
    CHECK(m.token_count == 2);
    CHECK(m.chars_per_token.value() == 3.5);
    CHECK(m.tokens_per_word.value() == 1.0);

    const BpeVocab chars({"a", "b", "c"}, {});
    const auto m3 = metrics(chars, "abc");
    CHECK(m3.token_count == 3);
    CHECK(m3.chars_per_token.value() == 1.0);
    CHECK(m3.tokens_per_word.value() == 3.0);
}

TEST_CASE("characters are Unicode scalars and words are whitespace runs") {
    const BpeVocab v({"a"}, {});
    const auto m = metrics(v, "zażółć  gęślą\njaźń\t");
    CHECK(m.char_count == 19);
    CHECK(m.word_count == 3);
    CHECK(m.token_count == 19);
    CHECK(count_words("") == 0);
    CHECK(count_words(" a b ") == 2);
}

TEST_CASE("metric identities hold exactly on random corpora") {
    Rng rng(17);
    static const char* pool[] = {"a", "b", "ab", "ó", "ł", " ", " ", "\n", "ba", "aa"};
    const auto v = bpe_train({"ab ab aa ba łó abab", "ó ł ab"}, 14);
    for (int i = 0; i < 1000; ++i) {
        std::string s = "a";
        const auto n = rng.below(60);
        for (std::uint64_t k = 0; k < n; ++k) s += pool[rng.below(10)];
        const auto m = metrics(v, s);
        CHECK(m.chars_per_token.num == m.char_count);
        CHECK(m.chars_per_token.den == m.token_count);
        CHECK(m.tokens_per_word.num == m.token_count);
        CHECK(m.tokens_per_word.den == m.word_count);
        // Ratio times denominator recovers the numerator to double rounding.
        CHECK(m.chars_per_token.value() * double(m.token_count) == doctest::Approx(double(m.char_count)).epsilon(1e-15));
        CHECK(m.tokens_per_word.value() * double(m.word_count) == doctest::Approx(double(m.token_count)).epsilon(1e-15));
    }
}

TEST_CASE("metric errors") {
    const BpeVocab v({"a"}, {});
    CHECK_THROWS_AS(metrics(v, ""), DataError);
    CHECK_THROWS_AS(metrics(v, "   "), DataError);
    CHECK_THROWS_AS(metrics_from_counts(0, 5, 1), DataError);
}

TEST_CASE("CSV layout and rounding") {
    const auto m = metrics_from_counts(747, 1793, 232);
    CHECK(metrics_csv({{"mistral", m}}) == "tokenizer,tokens,CpT,TpW\nmistral,747,2.40,3.22\n");
    CHECK(format_2dp(2.005) == "2.00");
    CHECK(format_2dp(3.2198) == "3.22");
}

TEST_CASE("published-row consistency ranges") {
    const PublishedMetrics row{747, 2.40, 3.22};
    const auto chars = compatible_char_counts(row);
    const auto words = compatible_word_counts(row);
    REQUIRE_FALSE(chars.empty());
    REQUIRE_FALSE(words.empty());
    CHECK((chars.lo <= 1793 && 1793 <= chars.hi));
    CHECK((words.lo <= 232 && 232 <= words.hi));
    for (std::size_t c = chars.lo - 5; c <= chars.hi + 5; ++c) {
        CHECK((format_2dp(double(c) / 747) == "2.40") == (c >= chars.lo && c <= chars.hi));
    }
    for (std::size_t w = words.lo - 3; w <= words.hi + 3; ++w) {
        CHECK((format_2dp(747.0 / double(w)) == "3.22") == (w >= words.lo && w <= words.hi));
    }
    CHECK(matches_published(metrics_from_counts(747, 1793, 232), row));
    CHECK_FALSE(matches_published(metrics_from_counts(746, 1793, 232), row));
    CHECK_FALSE(matches_published(metrics_from_counts(747, 1900, 232), row));
}
