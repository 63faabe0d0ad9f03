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

#include <algorithm>
#include <set>

#include <json.hpp>

#include "wlab/error.hpp"
#include "wlab/tok/merge.hpp"

using namespace wlab;
using namespace wlab::tok;

namespace {

// Independent tokenizer for the oracle: plain string vectors, merges applied
// in list order with a left-to-right non-overlapping scan.
std::vector<std::string> oracle_tokenize(const std::vector<BpeMerge>& merges, const std::string& s) {
    std::vector<std::string> t;
    for (char c : s) t.emplace_back(1, c);
    for (const auto& m : merges) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i + 1 < t.size() && t[i] == m.left && t[i + 1] == m.right) {
                out.push_back(m.merged);
                ++i;
            } else {
                out.push_back(t[i]);
            }
        }
        t = std::move(out);
    }
    return t;
}

// a: "abc" -> ["ab", "c"]; b: "abc" -> ["a", "bc"]. Six tokens each.
BpeVocab vocab_a() { return BpeVocab({"a", "b", "c"}, {{"a", "b", "ab"}, {"c", "c", "cc"}, {"b", "b", "bb"}}); }
BpeVocab vocab_b() { return BpeVocab({"a", "b", "c"}, {{"b", "c", "bc"}, {"a", "a", "aa"}, {"c", "c", "cc"}}); }

}  // namespace

TEST_CASE("merging a vocabulary with itself changes nothing") {
    const auto a = vocab_a();
    const auto r = merge_vocabs(a, a);
    CHECK(r.merged == a);
    CHECK(r.conflicts.empty());
}

TEST_CASE("disjoint vocabularies share no tokens") {
    const BpeVocab a({"a", "b", "c", "d"}, {{"a", "b", "ab"}});
    const BpeVocab b({"a", "b", "c", "d"}, {{"c", "d", "cd"}});
    const auto r = merge_vocabs(a, b);
    CHECK(r.conflicts.overlapping_tokens.empty());
    CHECK(r.merged.merges().size() == 2);
}

TEST_CASE("the constructed ambiguous pair is detected") {
    const auto a = vocab_a(), b = vocab_b();
    CHECK(a.size() == 6);
    CHECK(b.size() == 6);
    CHECK(tokenize(a, "abc") == std::vector<std::string>{"ab", "c"});
    CHECK(tokenize(b, "abc") == std::vector<std::string>{"a", "bc"});
    MergeOptions opts;
    opts.max_len = 4;
    const auto r = merge_vocabs(a, b, opts);

    // b's merges follow a's, without the shared (c, c).
    const std::vector<BpeMerge> expect = {{"a", "b", "ab"}, {"c", "c", "cc"}, {"b", "b", "bb"},
                                          {"b", "c", "bc"}, {"a", "a", "aa"}};
    CHECK(r.merged.merges() == expect);

    const auto& pairs = r.conflicts.ambiguous_pairs;
    const bool found = std::any_of(pairs.begin(), pairs.end(), [](const AmbiguousPair& p) {
        return p.first.merged == "ab" && p.second.merged == "bc" && !p.order_inverted;
    });
    CHECK(found);

    // Exhaustive oracle over every string of length 2..4 on {a, b, c}.
    std::set<std::string> oracle;
    std::vector<std::string> level = {""};
    for (int len = 1; len <= 4; ++len) {
        std::vector<std::string> next;
        for (const auto& p : level) {
            for (char c : std::string("abc")) next.push_back(p + c);
        }
        level = next;
        for (const auto& s : level) {
            const auto ta = oracle_tokenize(a.merges(), s), tb = oracle_tokenize(b.merges(), s);
            const auto tm = oracle_tokenize(expect, s);
            if (tm != ta || tm != tb) oracle.insert(s);
        }
    }
    std::set<std::string> reported;
    for (const auto& s : r.conflicts.ambiguous_strings) reported.insert(s.text);
    CHECK(reported == oracle);
    CHECK(reported.count("abc") == 1);
    CHECK(r.conflicts.scanned_max_len == 4);
    CHECK_FALSE(r.conflicts.truncated);

    const auto j = nlohmann::json::parse(r.conflicts.to_json());
    CHECK(j["ambiguous_strings"].size() == oracle.size());
}

TEST_CASE("same token from different pairs is an overlap") {
    const BpeVocab a({"a", "b", "c"}, {{"a", "b", "ab"}, {"ab", "c", "abc"}});
    const BpeVocab b({"a", "b", "c"}, {{"b", "c", "bc"}, {"a", "bc", "abc"}});
    const auto r = merge_vocabs(a, b);
    REQUIRE(r.conflicts.overlapping_tokens.size() == 1);
    CHECK(r.conflicts.overlapping_tokens[0].token == "abc");
    CHECK(r.conflicts.overlapping_tokens[0].from_a == BpeMerge{"ab", "c", "abc"});
    CHECK(r.conflicts.overlapping_tokens[0].from_b == BpeMerge{"a", "bc", "abc"});
}

TEST_CASE("inverted merge order is reported") {
    const BpeVocab a({"a", "b", "c"}, {{"a", "b", "ab"}, {"b", "c", "bc"}});
    const BpeVocab b({"a", "b", "c"}, {{"b", "c", "bc"}, {"a", "b", "ab"}});
    const auto r = merge_vocabs(a, b);
    REQUIRE(r.conflicts.ambiguous_pairs.size() == 1);
    CHECK(r.conflicts.ambiguous_pairs[0].order_inverted);
}

TEST_CASE("alphabet checks and scan budget") {
    const BpeVocab a({"a", "b"}, {{"a", "b", "ab"}});
    const BpeVocab b({"a", "c"}, {{"a", "c", "ac"}});
    CHECK_THROWS_AS(merge_vocabs(a, b), ConfigError);
    MergeOptions opts;
    opts.union_alphabet = true;
    const auto r = merge_vocabs(a, b, opts);
    CHECK(r.merged.alphabet() == std::vector<std::string>{"a", "b", "c"});

    opts.budget = 20;
    const auto t = merge_vocabs(vocab_a(), vocab_b(), opts);
    CHECK(t.conflicts.truncated);
    CHECK(t.conflicts.scanned_max_len == 2);
    CHECK(t.conflicts.scanned_strings == 9);
}
