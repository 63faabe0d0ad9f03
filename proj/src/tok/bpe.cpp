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

#include "wlab/tok/bpe.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "wlab/error.hpp"
#include "wlab/io.hpp"
#include "wlab/utf8.hpp"

namespace wlab::tok {

namespace {

std::string pair_key(std::string_view l, std::string_view r) {
    std::string k;
    k.reserve(l.size() + r.size() + 1);
    k += l;
    k += '\0';
    k += r;
    return k;
}

bool is_space_char(std::string_view ch) {
    if (ch.size() == 1) {
        const char c = ch[0];
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    }
    return ch == "\xC2\xA0";
}

// Apply one merge left to right over a symbol sequence.
template <typename Sym>
bool apply_merge(std::vector<Sym>& syms, const Sym& left, const Sym& right, const Sym& merged) {
    std::size_t first = 0;
    while (first + 1 < syms.size() && !(syms[first] == left && syms[first + 1] == right)) ++first;
    if (first + 1 >= syms.size()) return false;
    std::size_t w = first;
    bool changed = false;
    for (std::size_t r = first; r < syms.size();) {
        if (r + 1 < syms.size() && syms[r] == left && syms[r + 1] == right) {
            syms[w++] = merged;
            r += 2;
            changed = true;
        } else {
            syms[w++] = syms[r++];
        }
    }
    syms.resize(w);
    return changed;
}

}  // namespace

BpeVocab::BpeVocab(std::vector<std::string> alphabet, std::vector<BpeMerge> merges)
    : alphabet_(std::move(alphabet)), merges_(std::move(merges)) {
    rebuild();
}

void BpeVocab::rebuild() {
    tokens_.clear();
    token_index_.clear();
    rank_.clear();
    for (const auto& a : alphabet_) {
        if (utf8::count_scalars(a) != 1) throw DataError("bpe vocab: alphabet entry '" + a + "' is not one character");
        if (!token_index_.emplace(a, tokens_.size()).second) throw DataError("bpe vocab: duplicate alphabet entry '" + a + "'");
        tokens_.push_back(a);
    }
    for (std::size_t i = 0; i < merges_.size(); ++i) {
        const auto& m = merges_[i];
        if (!token_index_.count(m.left) || !token_index_.count(m.right)) {
            throw DataError("bpe vocab: merge " + std::to_string(i + 1) + " uses an undefined token");
        }
        if (m.merged != m.left + m.right) throw DataError("bpe vocab: merge " + std::to_string(i + 1) + " is inconsistent");
        // A pair can legitimately recur when a later merge recreates one of
        // its symbols; the rank is that of its first appearance.
        rank_.emplace(pair_key(m.left, m.right), static_cast<long>(i));
        if (token_index_.emplace(m.merged, tokens_.size()).second) tokens_.push_back(m.merged);
    }
}

bool BpeVocab::has_token(std::string_view s) const { return token_index_.count(std::string(s)) > 0; }

long BpeVocab::merge_rank(std::string_view left, std::string_view right) const {
    auto it = rank_.find(pair_key(left, right));
    return it == rank_.end() ? -1 : it->second;
}

std::string escape_symbol(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case ' ': out += "\\s"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            case '#': out += "\\#"; break;
            case '\\': out += "\\\\"; break;
            default: out += c; break;
        }
    }
    return out;
}

std::string unescape_symbol(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\') {
            out += s[i];
            continue;
        }
        if (++i == s.size()) throw DataError("bpe vocab: dangling escape in '" + std::string(s) + "'");
        switch (s[i]) {
            case 's': out += ' '; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case '#': out += '#'; break;
            case '\\': out += '\\'; break;
            default: throw DataError("bpe vocab: unknown escape '\\" + std::string(1, s[i]) + "'");
        }
    }
    return out;
}

std::string BpeVocab::serialize() const {
    std::string out = "#wlab-bpe 1\n#alphabet";
    for (const auto& a : alphabet_) out += ' ' + escape_symbol(a);
    out += '\n';
    for (const auto& m : merges_) out += escape_symbol(m.left) + ' ' + escape_symbol(m.right) + ' ' + escape_symbol(m.merged) + '\n';
    return out;
}

BpeVocab BpeVocab::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<std::string> alphabet;
    std::vector<BpeMerge> merges;
    bool saw_header = false, saw_alphabet = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::vector<std::string> parts;
        for (std::string f; fields >> f;) parts.push_back(f);
        const std::string where = "bpe vocab line " + std::to_string(line_no) + ": ";
        if (parts[0] == "#wlab-bpe") {
            if (parts.size() != 2 || parts[1] != "1") throw DataError(where + "unsupported vocab version");
            saw_header = true;
        } else if (parts[0] == "#alphabet") {
            for (std::size_t i = 1; i < parts.size(); ++i) alphabet.push_back(unescape_symbol(parts[i]));
            saw_alphabet = true;
        } else if (parts[0][0] == '#') {
            continue;
        } else {
            if (parts.size() != 3) throw DataError(where + "expected 'left right merged'");
            merges.push_back({unescape_symbol(parts[0]), unescape_symbol(parts[1]), unescape_symbol(parts[2])});
        }
    }
    if (!saw_header || !saw_alphabet) throw DataError("bpe vocab: missing #wlab-bpe or #alphabet header");
    return BpeVocab(std::move(alphabet), std::move(merges));
}

void BpeVocab::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

BpeVocab BpeVocab::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::vector<std::string> pre_split(std::string_view text) {
    std::vector<std::string> segments;
    std::string current;
    bool prev_space = true;
    for (auto& ch : utf8::split_chars(text)) {
        const bool space = is_space_char(ch);
        if (space && !prev_space && !current.empty()) {
            segments.push_back(std::move(current));
            current.clear();
        }
        current += ch;
        prev_space = space;
    }
    if (!current.empty()) segments.push_back(std::move(current));
    return segments;
}

BpeVocab bpe_train(const std::vector<std::string>& corpus, std::size_t vocab_size) {
    if (corpus.empty()) throw DataError("bpe_train: empty corpus");
    std::map<std::string, std::size_t> segment_counts;
    std::set<std::string> alphabet_set;
    for (const auto& doc : corpus) {
        for (auto& seg : pre_split(doc)) ++segment_counts[seg];
        for (auto& ch : utf8::split_chars(doc)) alphabet_set.insert(ch);
    }
    if (alphabet_set.empty()) throw DataError("bpe_train: corpus contains no characters");
    std::vector<std::string> alphabet(alphabet_set.begin(), alphabet_set.end());
    if (vocab_size <= alphabet.size()) {
        throw ConfigError("bpe_train: vocab_size " + std::to_string(vocab_size) + " must exceed the alphabet size " +
                          std::to_string(alphabet.size()));
    }

    // Symbols are interned so pair counting works on integers.
    std::vector<std::string> names(alphabet);
    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < names.size(); ++i) ids[names[i]] = static_cast<int>(i);
    struct Word {
        std::vector<int> syms;
        std::size_t count;
    };
    std::vector<Word> words;
    for (const auto& [seg, count] : segment_counts) {
        Word w{{}, count};
        for (auto& ch : utf8::split_chars(seg)) w.syms.push_back(ids.at(ch));
        words.push_back(std::move(w));
    }

    std::vector<BpeMerge> merges;
    std::set<std::string> token_set(alphabet.begin(), alphabet.end());
    while (token_set.size() < vocab_size) {
        std::map<std::pair<int, int>, std::size_t> counts;
        for (const auto& w : words) {
            for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) counts[{w.syms[i], w.syms[i + 1]}] += w.count;
        }
        if (counts.empty()) break;
        const std::pair<int, int>* best = nullptr;
        std::size_t best_count = 0;
        for (const auto& [pair, count] : counts) {
            if (!best || count > best_count ||
                (count == best_count &&
                 std::tie(names[pair.first], names[pair.second]) < std::tie(names[best->first], names[best->second]))) {
                best = &pair;
                best_count = count;
            }
        }
        const auto [l, r] = *best;
        const std::string merged = names[l] + names[r];
        int merged_id;
        if (auto it = ids.find(merged); it != ids.end()) {
            merged_id = it->second;
        } else {
            merged_id = static_cast<int>(names.size());
            names.push_back(merged);
            ids[merged] = merged_id;
        }
        merges.push_back({names[l], names[r], merged});
        token_set.insert(merged);
        for (auto& w : words) apply_merge(w.syms, l, r, merged_id);
    }
    return BpeVocab(std::move(alphabet), std::move(merges));
}

std::vector<std::string> tokenize(const BpeVocab& vocab, std::string_view text) {
    std::vector<std::string> out;
    const auto& merges = vocab.merges();
    for (const auto& seg : pre_split(text)) {
        std::vector<std::string> syms = utf8::split_chars(seg);
        for (const auto& m : merges) {
            if (syms.size() < 2) break;
            apply_merge(syms, m.left, m.right, m.merged);
        }
        for (auto& s : syms) out.push_back(std::move(s));
    }
    return out;
}

}  // namespace wlab::tok
