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
#include <string>
#include <utility>
#include <vector>

#include "wlab/tok/bpe.hpp"

namespace wlab::tok {

struct OverlappingToken {
    std::string token;
    BpeMerge from_a;  // how a derives it
    BpeMerge from_b;  // how b derives it
};

// Two merges whose relative application order is not settled: either both
// vocabularies contain both pairs in opposite order, or they come from
// different vocabularies and share a boundary symbol, so they compete for
// the same character.
struct AmbiguousPair {
    BpeMerge first;
    BpeMerge second;
    bool order_inverted = false;  // true for the first kind
};

struct AmbiguousString {
    std::string text;
    std::vector<std::string> under_a, under_b, under_merged;
};

struct MergeConflicts {
    std::vector<OverlappingToken> overlapping_tokens;
    std::vector<AmbiguousPair> ambiguous_pairs;
    // Strings whose tokenization under the merged vocabulary differs from the
    // one under a or under b.
    std::vector<AmbiguousString> ambiguous_strings;
    std::size_t scanned_max_len = 0;  // longest fully scanned length
    std::size_t scanned_strings = 0;
    bool truncated = false;  // the scan budget ran out before max_len

    bool empty() const { return overlapping_tokens.empty() && ambiguous_pairs.empty() && ambiguous_strings.empty(); }
    std::string to_json() const;
};

struct MergeOptions {
    std::size_t max_len = 6;
    std::size_t budget = 2'000'000;  // strings per scan
    bool union_alphabet = false;     // accept differing alphabets
};

struct MergeResult {
    BpeVocab merged;
    MergeConflicts conflicts;
};

// Union of tokens: a's merges, then b's merges whose pair a lacks. The
// ambiguity scan enumerates every string up to max_len over the characters
// that occur in some merged token. Throws ConfigError when the alphabets
// differ and union_alphabet is off.
MergeResult merge_vocabs(const BpeVocab& a, const BpeVocab& b, const MergeOptions& opts = {});

}  // namespace wlab::tok
