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

#include "wlab/corpus/clean.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>

#include "wlab/utf8.hpp"

namespace wlab::corpus {

namespace {

struct Span {
    std::size_t begin, end;
};

bool is_ascii_alnum(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool starts_with_ci(std::string_view s, std::size_t i, std::string_view prefix) {
    if (s.size() - i < prefix.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
        char c = s[i + k];
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (c != prefix[k]) return false;
    }
    return true;
}

// ---- matchers: each returns the match starting exactly at i, if any ----

std::optional<Span> match_url(std::string_view s, std::size_t i) {
    if (i > 0 && (is_ascii_alnum(s[i - 1]) || s[i - 1] == '/' || s[i - 1] == '.')) return std::nullopt;
    std::size_t p;
    if (starts_with_ci(s, i, "https://")) {
        p = i + 8;
    } else if (starts_with_ci(s, i, "http://")) {
        p = i + 7;
    } else if (starts_with_ci(s, i, "www.")) {
        p = i + 4;
    } else {
        return std::nullopt;
    }
    const std::size_t body = p;
    auto url_char = [](char c) {
        return !is_space(c) && c != '<' && c != '>' && c != '"' && c != '\'' && static_cast<unsigned char>(c) >= 0x21;
    };
    while (p < s.size() && url_char(s[p])) ++p;
    auto trailing = [](char c) {
        return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')' || c == ']' || c == '}';
    };
    while (p > body && trailing(s[p - 1])) --p;
    if (p == body) return std::nullopt;
    return Span{i, p};
}

bool email_local_char(char c) {
    return is_ascii_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
}
bool email_domain_char(char c) { return is_ascii_alnum(c) || c == '.' || c == '-'; }

// Match an address around the '@' at position at.
std::optional<Span> match_email_at(std::string_view s, std::size_t at) {
    std::size_t b = at;
    while (b > 0 && email_local_char(s[b - 1])) --b;
    while (b < at && s[b] == '.') ++b;
    if (b == at) return std::nullopt;
    std::size_t e = at + 1;
    while (e < s.size() && email_domain_char(s[e])) ++e;
    while (e > at + 1 && (s[e - 1] == '.' || s[e - 1] == '-')) --e;
    const std::string_view domain = s.substr(at + 1, e - at - 1);
    const auto dot = domain.rfind('.');
    if (dot == std::string_view::npos || dot == 0) return std::nullopt;
    const auto tld = domain.substr(dot + 1);
    if (tld.size() < 2) return std::nullopt;
    for (char c : tld) {
        if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))) return std::nullopt;
    }
    return Span{b, e};
}

std::optional<Span> match_phone(std::string_view s, std::size_t i) {
    if (i > 0) {
        const char prev = s[i - 1];
        if (is_ascii_alnum(prev) || prev == '.' || prev == ',' || prev == '+' || prev == '-' || prev == '_' ||
            prev == '/') {
            return std::nullopt;
        }
    }
    std::size_t p = i;
    if (s[p] == '+') ++p;
    if (p >= s.size() || !is_digit(s[p])) return std::nullopt;
    std::size_t digits = 0;
    std::size_t end = p;
    while (p < s.size()) {
        if (is_digit(s[p])) {
            ++digits;
            ++p;
            end = p;
        } else if ((s[p] == ' ' || s[p] == '-') && p + 1 < s.size() && is_digit(s[p + 1])) {
            ++p;
        } else {
            break;
        }
    }
    if (end < s.size() && (is_ascii_alnum(s[end]) || s[end] == '@')) return std::nullopt;
    if (digits < 9 || digits > 15) return std::nullopt;
    return Span{i, end};
}

template <typename Matcher>
std::vector<Span> find_all(std::string_view s, Matcher m) {
    std::vector<Span> out;
    for (std::size_t i = 0; i < s.size();) {
        if (auto sp = m(s, i)) {
            out.push_back(*sp);
            i = sp->end;
        } else {
            ++i;
        }
    }
    return out;
}

std::vector<Span> find_urls(std::string_view s) { return find_all(s, match_url); }

std::vector<Span> find_emails(std::string_view s) {
    std::vector<Span> out;
    std::size_t from = 0;
    for (std::size_t at = s.find('@'); at != std::string_view::npos; at = s.find('@', at + 1)) {
        auto sp = match_email_at(s, at);
        if (!sp || sp->begin < from) continue;
        out.push_back(*sp);
        from = sp->end;
        if (sp->end > at) at = sp->end - 1;
    }
    return out;
}

std::vector<Span> find_phones(std::string_view s) {
    std::vector<Span> out;
    for (std::size_t i = 0; i < s.size();) {
        const char c = s[i];
        if (c == '+' || is_digit(c)) {
            if (auto sp = match_phone(s, i)) {
                out.push_back(*sp);
                i = sp->end;
                continue;
            }
            // Skip the rest of this digit run; a match cannot start inside it.
            ++i;
            while (i < s.size() && is_digit(s[i])) ++i;
            continue;
        }
        ++i;
    }
    return out;
}

bool replace_spans(std::string& text, const std::vector<Span>& spans, std::string_view placeholder, EditKind kind,
                   std::vector<Edit>& edits) {
    if (spans.empty()) return false;
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    for (const auto& sp : spans) {
        out.append(text, pos, sp.begin - pos);
        edits.push_back(Edit{kind, out.size()});
        out += placeholder;
        pos = sp.end;
    }
    out.append(text, pos, std::string::npos);
    text = std::move(out);
    return true;
}

std::string repair_utf8(std::string_view raw, std::vector<Edit>& edits) {
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
        const auto len = utf8::valid_sequence_length(raw, i);
        if (len == 0) {
            edits.push_back(Edit{EditKind::InvalidUtf8, out.size()});
            out += "\xEF\xBF\xBD";
            ++i;
        } else {
            out.append(raw.substr(i, len));
            i += len;
        }
    }
    return out;
}

std::string normalize_line_endings(std::string_view s, std::vector<Edit>& edits) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r') {
            edits.push_back(Edit{EditKind::LineEnding, out.size()});
            out += '\n';
            if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
        } else {
            out += s[i];
        }
    }
    return out;
}

std::string strip_controls(std::string_view s, std::vector<Edit>& edits) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto len = std::max<std::size_t>(1, utf8::valid_sequence_length(s, i));
        const char32_t cp = utf8::decode_at(s, i, len);
        const bool control = (cp < 0x20 && cp != '\t' && cp != '\n') || cp == 0x7F || (cp >= 0x80 && cp <= 0x9F);
        if (control) {
            edits.push_back(Edit{EditKind::ControlChar, out.size()});
        } else {
            out.append(s.substr(i, len));
        }
        i += len;
    }
    return out;
}

std::string collapse_blank_lines(std::string_view s, std::vector<Edit>& edits) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '\n') {
            out += s[i++];
            continue;
        }
        // Count whitespace-only lines following this newline.
        std::size_t p = i + 1;
        std::size_t blanks = 0;
        std::size_t after = p;
        while (true) {
            std::size_t q = p;
            while (q < s.size() && (s[q] == ' ' || s[q] == '\t')) ++q;
            if (q < s.size() && s[q] == '\n') {
                ++blanks;
                p = q + 1;
                after = p;
            } else {
                break;
            }
        }
        if (blanks > 2) {
            edits.push_back(Edit{EditKind::BlankLines, out.size()});
            out += "\n\n\n";
            i = after;
        } else {
            out += '\n';
            ++i;
        }
    }
    return out;
}

}  // namespace

std::string_view edit_kind_name(EditKind kind) {
    switch (kind) {
        case EditKind::InvalidUtf8: return "invalid_utf8";
        case EditKind::LineEnding: return "line_ending";
        case EditKind::ControlChar: return "control_char";
        case EditKind::Email: return "email";
        case EditKind::Url: return "url";
        case EditKind::Phone: return "phone";
        case EditKind::BlankLines: return "blank_lines";
    }
    return "unknown";
}

CleanResult clean_text(std::string_view raw) {
    CleanResult r;
    std::string text = repair_utf8(raw, r.edits);
    text = normalize_line_endings(text, r.edits);
    text = strip_controls(text, r.edits);
    // Each replacement removes an '@', a URL prefix or at least nine digits,
    // none of which the placeholders contain, so this terminates.
    for (bool changed = true; changed;) {
        changed = replace_spans(text, find_urls(text), "<URL>", EditKind::Url, r.edits);
        changed |= replace_spans(text, find_emails(text), "<EMAIL>", EditKind::Email, r.edits);
        changed |= replace_spans(text, find_phones(text), "<PHONE>", EditKind::Phone, r.edits);
    }
    r.text = collapse_blank_lines(text, r.edits);
    return r;
}

std::size_t count_urls(std::string_view text) { return find_urls(text).size(); }
std::size_t count_emails(std::string_view text) { return find_emails(text).size(); }
std::size_t count_phones(std::string_view text) { return find_phones(text).size(); }

}  // namespace wlab::corpus
