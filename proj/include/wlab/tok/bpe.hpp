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
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wlab::tok {

struct BpeMerge {
    std::string left;
    std::string right;
    std::string merged;  // left + right

    friend bool operator==(const BpeMerge&, const BpeMerge&) = default;
};

// Character-level BPE vocabulary. Base symbols are Unicode scalar values,
// each stored as its UTF-8 string.
class BpeVocab {
public:
    BpeVocab() = default;
    BpeVocab(std::vector<std::string> alphabet, std::vector<BpeMerge> merges);

    const std::vector<std::string>& alphabet() const { return alphabet_; }
    const std::vector<BpeMerge>& merges() const { return merges_; }

    // Alphabet followed by merged strings in merge order, without repeats.
    const std::vector<std::string>& tokens() const { return tokens_; }
    std::size_t size() const { return tokens_.size(); }
    bool has_token(std::string_view s) const;

    // Index of the merge for (left, right), or -1.
    long merge_rank(std::string_view left, std::string_view right) const;

    // Text format:
    //   #wlab-bpe 1
    //   #alphabet <sym> <sym> ...
    //   <left> <right> <merged>      (one line per merge, in order)
    // Symbols escape space as \s, newline as \n, tab as \t, '#' as \# and
    // backslash as \\.
    std::string serialize() const;
    static BpeVocab parse(std::string_view text);  // throws DataError
    void save(const std::filesystem::path& path) const;
    static BpeVocab load(const std::filesystem::path& path);

    friend bool operator==(const BpeVocab& a, const BpeVocab& b) {
        return a.alphabet_ == b.alphabet_ && a.merges_ == b.merges_;
    }

private:
    void rebuild();

    std::vector<std::string> alphabet_;
    std::vector<BpeMerge> merges_;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> token_index_;
    std::unordered_map<std::string, long> rank_;  // key: left + '\0' + right
};

// Split text into pre-tokenization segments: a segment boundary falls before
// every whitespace character that follows a non-whitespace character, so
// "aaa bbb" becomes {"aaa", " bbb"}. Merges never cross segments.
std::vector<std::string> pre_split(std::string_view text);

// Greedy most-frequent-pair training. Ties go to the lexicographically
// smallest (left, right) pair. Stops once the vocabulary holds vocab_size
// tokens or no adjacent pair is left.
BpeVocab bpe_train(const std::vector<std::string>& corpus, std::size_t vocab_size);

// Applies every merge, in learned order, across each segment. Characters
// outside the alphabet pass through as single-character tokens.
std::vector<std::string> tokenize(const BpeVocab& vocab, std::string_view text);

std::string escape_symbol(std::string_view s);
std::string unescape_symbol(std::string_view s);

}  // namespace wlab::tok
