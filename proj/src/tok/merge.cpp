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

#include "wlab/tok/merge.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "wlab/error.hpp"
#include "wlab/utf8.hpp"

namespace wlab::tok {

namespace {

std::map<std::string, BpeMerge> first_derivations(const BpeVocab& v) {
    std::map<std::string, BpeMerge> out;
    for (const auto& m : v.merges()) out.emplace(m.merged, m);
    return out;
}

nlohmann::json merge_json(const BpeMerge& m) { return {m.left, m.right, m.merged}; }

}  // namespace

MergeResult merge_vocabs(const BpeVocab& a, const BpeVocab& b, const MergeOptions& opts) {
    std::vector<std::string> alphabet = a.alphabet();
    if (a.alphabet() != b.alphabet()) {
        const std::set<std::string> sa(a.alphabet().begin(), a.alphabet().end());
        const std::set<std::string> sb(b.alphabet().begin(), b.alphabet().end());
        if (sa != sb && !opts.union_alphabet) {
            throw ConfigError("merge_vocabs: the vocabularies have different base alphabets");
        }
        for (const auto& ch : b.alphabet()) {
            if (!sa.count(ch)) alphabet.push_back(ch);
        }
    }

    std::vector<BpeMerge> merges = a.merges();
    for (const auto& m : b.merges()) {
        if (a.merge_rank(m.left, m.right) < 0) merges.push_back(m);
    }
    MergeResult result{BpeVocab(alphabet, merges), {}};
    auto& c = result.conflicts;

    const auto da = first_derivations(a);
    const auto db = first_derivations(b);
    for (const auto& [tok, ma] : da) {
        auto it = db.find(tok);
        if (it != db.end() && !(it->second == ma)) c.overlapping_tokens.push_back({tok, ma, it->second});
    }

    // Inverted order among pairs both vocabularies contain.
    const auto& am = a.merges();
    std::vector<std::pair<long, long>> shared;  // (rank in a, rank in b)
    for (std::size_t i = 0; i < am.size(); ++i) {
        const long rb = b.merge_rank(am[i].left, am[i].right);
        if (rb >= 0 && a.merge_rank(am[i].left, am[i].right) == static_cast<long>(i)) shared.emplace_back(i, rb);
    }
    for (std::size_t x = 0; x < shared.size(); ++x) {
        for (std::size_t y = x + 1; y < shared.size(); ++y) {
            if ((shared[x].first < shared[y].first) != (shared[x].second < shared[y].second)) {
                c.ambiguous_pairs.push_back({am[shared[x].first], am[shared[y].first], true});
            }
        }
    }
    // Merges unique to each side that compete for a boundary symbol.
    std::vector<const BpeMerge*> only_a, only_b;
    for (const auto& m : a.merges()) {
        if (b.merge_rank(m.left, m.right) < 0) only_a.push_back(&m);
    }
    for (const auto& m : b.merges()) {
        if (a.merge_rank(m.left, m.right) < 0) only_b.push_back(&m);
    }
    for (const auto* ma : only_a) {
        for (const auto* mb : only_b) {
            if (ma->right == mb->left || mb->right == ma->left) c.ambiguous_pairs.push_back({*ma, *mb, false});
        }
    }

    // Exhaustive scan over characters that take part in some merge.
    std::set<std::string> chars;
    for (const auto* v : {&a, &b}) {
        for (const auto& m : v->merges()) {
            for (auto& ch : utf8::split_chars(m.merged)) chars.insert(ch);
        }
    }
    const std::vector<std::string> symbols(chars.begin(), chars.end());
    const std::size_t k = symbols.size();
    std::size_t scanned = 0;
    c.scanned_max_len = 1;
    for (std::size_t len = 2; len <= opts.max_len && k > 0; ++len) {
        std::size_t total = 1;
        bool overflow = false;
        for (std::size_t i = 0; i < len; ++i) {
            if (total > opts.budget / k + 1) overflow = true;
            total *= k;
        }
        if (overflow || scanned + total > opts.budget) {
            c.truncated = true;
            break;
        }
        std::vector<std::size_t> digits(len, 0);
        for (std::size_t n = 0; n < total; ++n) {
            std::string s;
            for (auto d : digits) s += symbols[d];
            auto ta = tokenize(a, s);
            auto tb = tokenize(b, s);
            auto tm = tokenize(result.merged, s);
            if (tm != ta || tm != tb) c.ambiguous_strings.push_back({s, std::move(ta), std::move(tb), std::move(tm)});
            for (std::size_t i = len; i-- > 0;) {
                if (++digits[i] < k) break;
                digits[i] = 0;
            }
        }
        scanned += total;
        c.scanned_max_len = len;
    }
    c.scanned_strings = scanned;
    return result;
}

std::string MergeConflicts::to_json() const {
    nlohmann::json j;
    j["overlapping_tokens"] = nlohmann::json::array();
    for (const auto& o : overlapping_tokens) {
        j["overlapping_tokens"].push_back({{"token", o.token}, {"a", merge_json(o.from_a)}, {"b", merge_json(o.from_b)}});
    }
    j["ambiguous_pairs"] = nlohmann::json::array();
    for (const auto& p : ambiguous_pairs) {
        j["ambiguous_pairs"].push_back({{"first", merge_json(p.first)},
                                        {"second", merge_json(p.second)},
                                        {"kind", p.order_inverted ? "order_inverted" : "competing"}});
    }
    j["ambiguous_strings"] = nlohmann::json::array();
    for (const auto& s : ambiguous_strings) {
        j["ambiguous_strings"].push_back({{"text", s.text}, {"a", s.under_a}, {"b", s.under_b}, {"merged", s.under_merged}});
    }
    j["scanned_max_len"] = scanned_max_len;
    j["scanned_strings"] = scanned_strings;
    j["truncated"] = truncated;
    return j.dump(2) + "\n";
}

}  // namespace wlab::tok
