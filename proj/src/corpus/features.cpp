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

#include "wlab/corpus/features.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "wlab/error.hpp"
#include "wlab/io.hpp"
#include "wlab/utf8.hpp"

namespace wlab::corpus {

namespace {

bool is_ws(char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == 0xA0 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x202F || c == 0x3000;
}

bool is_upper(char32_t c) {
    if (c >= 'A' && c <= 'Z') return true;
    if (c >= 0xC0 && c <= 0xDE) return c != 0xD7;
    if (c >= 0x100 && c <= 0x137) return c % 2 == 0;
    if (c >= 0x139 && c <= 0x148) return c % 2 == 1;
    if (c >= 0x14A && c <= 0x177) return c % 2 == 0;
    if (c == 0x178) return true;
    if (c >= 0x179 && c <= 0x17E) return c % 2 == 1;
    if (c >= 0x391 && c <= 0x3A9) return true;
    return c >= 0x400 && c <= 0x42F;
}

bool is_letter(char32_t c) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return true;
    if (c >= 0xC0 && c <= 0x24F) return c != 0xD7 && c != 0xF7;
    return (c >= 0x370 && c <= 0x3FF) || (c >= 0x400 && c <= 0x4FF);
}

char32_t to_lower(char32_t c) {
    if (!is_upper(c)) return c;
    if (c < 0x80 || (c >= 0xC0 && c <= 0xDE) || (c >= 0x391 && c <= 0x3A9) || (c >= 0x410 && c <= 0x42F)) {
        return c + 0x20;
    }
    if (c >= 0x400 && c <= 0x40F) return c + 0x50;
    if (c == 0x178) return 0xFF;
    return c + 1;
}

bool is_digit(char32_t c) { return c >= '0' && c <= '9'; }

bool is_punct(char32_t c) {
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
               (c >= 0x7B && c <= 0x7E);
    }
    return c == 0xA1 || c == 0xAB || c == 0xB7 || c == 0xBB || c == 0xBF || (c >= 0x2010 && c <= 0x205E);
}

bool is_markup(char32_t c) {
    switch (c) {
        case '<': case '>': case '{': case '}': case '[': case ']': case '|': case '#':
        case '*': case '_': case '=': case '~': case '`': case '\\': case '/':
            return true;
        default:
            return false;
    }
}

bool is_terminator(char32_t c) { return c == '.' || c == '!' || c == '?' || c == 0x2026; }

double safe_div(double a, double b) { return b > 0 ? a / b : 0.0; }

struct MeanStd {
    double mean = 0, std = 0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    if (xs.empty()) return r;
    double s = 0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(xs.size());
    double v = 0;
    for (double x : xs) v += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(v / static_cast<double>(xs.size()));
    return r;
}

struct TextStats {
    double chars = 0, letters = 0, upper = 0, digits = 0, spaces = 0, non_ascii = 0;
    double punct = 0, commas = 0, periods = 0, questions = 0, exclamations = 0, colons = 0;
    double semicolons = 0, quotes = 0, dashes = 0, parens = 0, ellipses = 0, markup = 0, repeats = 0;
    double words = 0, types = 0, hapax = 0, stopwords = 0, long_words = 0, short_words = 0;
    double capitalized = 0, all_caps = 0, numeric = 0, placeholders = 0, max_word_len = 0;
    MeanStd word_len, sentence_len, line_len;
    double sentences = 0, lines = 0, blank_lines = 0, paragraphs = 0, duplicate_lines = 0, nonblank_lines = 0;
};

std::u32string strip_punct(std::u32string_view w) {
    std::size_t b = 0, e = w.size();
    while (b < e && is_punct(w[b])) ++b;
    while (e > b && is_punct(w[e - 1])) --e;
    return std::u32string(w.substr(b, e - b));
}

TextStats compute_stats(std::string_view text, const std::set<std::string>& stopwords) {
    TextStats st;
    const std::u32string cps = utf8::decode(text);
    st.chars = static_cast<double>(cps.size());

    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t c = cps[i];
        if (is_letter(c)) st.letters += 1;
        if (is_upper(c)) st.upper += 1;
        if (is_digit(c)) st.digits += 1;
        if (is_ws(c)) st.spaces += 1;
        if (c >= 0x80) st.non_ascii += 1;
        if (is_markup(c)) st.markup += 1;
        if (i > 0 && cps[i - 1] == c) st.repeats += 1;
        if (!is_punct(c)) continue;
        st.punct += 1;
        switch (c) {
            case ',': st.commas += 1; break;
            case '.':
                st.periods += 1;
                if (i + 2 < cps.size() && cps[i + 1] == '.' && cps[i + 2] == '.' && (i == 0 || cps[i - 1] != '.')) {
                    st.ellipses += 1;
                }
                break;
            case '?': case 0xBF: st.questions += 1; break;
            case '!': case 0xA1: st.exclamations += 1; break;
            case ':': st.colons += 1; break;
            case ';': st.semicolons += 1; break;
            case '"': case '\'': case 0xAB: case 0xBB: st.quotes += 1; break;
            case '-': st.dashes += 1; break;
            case '(': case ')': case '[': case ']': case '{': case '}': st.parens += 1; break;
            case 0x2026: st.ellipses += 1; break;
            default:
                if (c >= 0x2018 && c <= 0x201F) st.quotes += 1;
                if (c >= 0x2010 && c <= 0x2015) st.dashes += 1;
                break;
        }
    }

    // Words: whitespace-delimited tokens that keep something after trimming
    // surrounding punctuation.
    std::vector<double> word_lengths;
    std::map<std::u32string, int> type_counts;
    for (std::size_t i = 0; i < cps.size();) {
        while (i < cps.size() && is_ws(cps[i])) ++i;
        const std::size_t b = i;
        while (i < cps.size() && !is_ws(cps[i])) ++i;
        if (b == i) continue;
        const std::u32string_view token(cps.data() + b, i - b);
        const std::u32string core = strip_punct(token);
        if (core.empty()) continue;
        st.words += 1;
        const double len = static_cast<double>(core.size());
        word_lengths.push_back(len);
        st.max_word_len = std::max(st.max_word_len, len);
        if (len >= 10) st.long_words += 1;
        if (len <= 3) st.short_words += 1;
        std::u32string lower = core;
        for (auto& c : lower) c = to_lower(c);
        ++type_counts[lower];
        if (stopwords.count(utf8::encode(lower))) st.stopwords += 1;
        if (is_upper(core[0])) st.capitalized += 1;
        std::size_t n_letters = 0, n_lower = 0, n_digits = 0;
        for (char32_t c : core) {
            if (is_letter(c)) {
                ++n_letters;
                if (!is_upper(c)) ++n_lower;
            }
            if (is_digit(c)) ++n_digits;
        }
        if (n_letters >= 2 && n_lower == 0) st.all_caps += 1;
        if (n_digits > 0 && n_letters == 0) st.numeric += 1;
        const std::string token_utf8 = utf8::encode(token);
        if (token_utf8.find("<EMAIL>") != std::string::npos || token_utf8.find("<URL>") != std::string::npos ||
            token_utf8.find("<PHONE>") != std::string::npos) {
            st.placeholders += 1;
        }
    }
    st.types = static_cast<double>(type_counts.size());
    for (const auto& [w, n] : type_counts) {
        if (n == 1) st.hapax += 1;
    }
    st.word_len = mean_std(word_lengths);

    // Sentences: a run of terminators followed by whitespace or the end of
    // text closes a sentence that contains at least one letter or digit.
    std::vector<double> sentence_words;
    {
        double words_in_sentence = 0;
        bool has_content = false;
        bool in_token = false;
        bool token_alnum = false;
        auto close_token = [&]() {
            if (in_token && token_alnum) words_in_sentence += 1;
            in_token = false;
            token_alnum = false;
        };
        auto close_sentence = [&]() {
            close_token();
            if (has_content) sentence_words.push_back(words_in_sentence);
            words_in_sentence = 0;
            has_content = false;
        };
        for (std::size_t i = 0; i < cps.size(); ++i) {
            const char32_t c = cps[i];
            if (is_ws(c)) {
                close_token();
                continue;
            }
            in_token = true;
            if (is_letter(c) || is_digit(c)) {
                token_alnum = true;
                has_content = true;
            }
            if (is_terminator(c)) {
                std::size_t j = i;
                while (j + 1 < cps.size() && is_terminator(cps[j + 1])) ++j;
                if (j + 1 == cps.size() || is_ws(cps[j + 1])) {
                    close_sentence();
                    i = j;
                }
            }
        }
        close_sentence();
    }
    st.sentences = static_cast<double>(sentence_words.size());
    st.sentence_len = mean_std(sentence_words);

    // Lines. A trailing newline does not open an extra empty line.
    std::vector<std::u32string_view> lines;
    {
        std::size_t b = 0;
        for (std::size_t i = 0; i <= cps.size(); ++i) {
            if (i == cps.size() || cps[i] == '\n') {
                if (i < cps.size() || b < cps.size()) lines.emplace_back(cps.data() + b, i - b);
                b = i + 1;
            }
        }
    }
    st.lines = static_cast<double>(lines.size());
    std::vector<double> line_lengths;
    std::unordered_set<std::u32string> seen;
    bool prev_blank = true;
    for (auto line : lines) {
        line_lengths.push_back(static_cast<double>(line.size()));
        std::size_t b = 0, e = line.size();
        while (b < e && is_ws(line[b])) ++b;
        while (e > b && is_ws(line[e - 1])) --e;
        const bool blank = b == e;
        if (blank) {
            st.blank_lines += 1;
        } else {
            st.nonblank_lines += 1;
            if (prev_blank) st.paragraphs += 1;
            if (!seen.emplace(line.substr(b, e - b)).second) st.duplicate_lines += 1;
        }
        prev_blank = blank;
    }
    st.line_len = mean_std(line_lengths);
    return st;
}

using Extractor = std::function<double(const TextStats&)>;

struct ExtractorDef {
    const char* id;
    const char* description;
    Extractor fn;
};

const std::vector<ExtractorDef>& extractor_table() {
    static const std::vector<ExtractorDef> table = {
        {"char_count", "Unicode scalar values", [](const TextStats& s) { return s.chars; }},
        {"word_count", "whitespace-delimited words", [](const TextStats& s) { return s.words; }},
        {"sentence_count", "sentences closed by . ! ? or ellipsis", [](const TextStats& s) { return s.sentences; }},
        {"line_count", "lines", [](const TextStats& s) { return s.lines; }},
        {"paragraph_count", "blocks of non-blank lines", [](const TextStats& s) { return s.paragraphs; }},
        {"mean_word_length", "mean word length in characters", [](const TextStats& s) { return s.word_len.mean; }},
        {"std_word_length", "standard deviation of word length", [](const TextStats& s) { return s.word_len.std; }},
        {"mean_sentence_length", "mean sentence length in words", [](const TextStats& s) { return s.sentence_len.mean; }},
        {"std_sentence_length", "standard deviation of sentence length", [](const TextStats& s) { return s.sentence_len.std; }},
        {"mean_line_length", "mean line length in characters", [](const TextStats& s) { return s.line_len.mean; }},
        {"type_token_ratio", "distinct lowercased words / words", [](const TextStats& s) { return safe_div(s.types, s.words); }},
        {"hapax_ratio", "words seen once / words", [](const TextStats& s) { return safe_div(s.hapax, s.words); }},
        {"punctuation_ratio", "punctuation / characters", [](const TextStats& s) { return safe_div(s.punct, s.chars); }},
        {"comma_ratio", "commas / characters", [](const TextStats& s) { return safe_div(s.commas, s.chars); }},
        {"period_ratio", "periods / characters", [](const TextStats& s) { return safe_div(s.periods, s.chars); }},
        {"question_ratio", "question marks / characters", [](const TextStats& s) { return safe_div(s.questions, s.chars); }},
        {"exclamation_ratio", "exclamation marks / characters", [](const TextStats& s) { return safe_div(s.exclamations, s.chars); }},
        {"colon_ratio", "colons / characters", [](const TextStats& s) { return safe_div(s.colons, s.chars); }},
        {"semicolon_ratio", "semicolons / characters", [](const TextStats& s) { return safe_div(s.semicolons, s.chars); }},
        {"quote_ratio", "quotation marks / characters", [](const TextStats& s) { return safe_div(s.quotes, s.chars); }},
        {"dash_ratio", "hyphens and dashes / characters", [](const TextStats& s) { return safe_div(s.dashes, s.chars); }},
        {"bracket_ratio", "brackets / characters", [](const TextStats& s) { return safe_div(s.parens, s.chars); }},
        {"ellipsis_ratio", "ellipses / characters", [](const TextStats& s) { return safe_div(s.ellipses, s.chars); }},
        {"uppercase_ratio", "uppercase letters / characters", [](const TextStats& s) { return safe_div(s.upper, s.chars); }},
        {"digit_ratio", "digits / characters", [](const TextStats& s) { return safe_div(s.digits, s.chars); }},
        {"letter_ratio", "letters / characters", [](const TextStats& s) { return safe_div(s.letters, s.chars); }},
        {"whitespace_ratio", "whitespace / characters", [](const TextStats& s) { return safe_div(s.spaces, s.chars); }},
        {"non_ascii_ratio", "non-ASCII characters / characters", [](const TextStats& s) { return safe_div(s.non_ascii, s.chars); }},
        {"stopword_ratio", "stopwords / words", [](const TextStats& s) { return safe_div(s.stopwords, s.words); }},
        {"long_word_ratio", "words of 10+ characters / words", [](const TextStats& s) { return safe_div(s.long_words, s.words); }},
        {"short_word_ratio", "words of at most 3 characters / words", [](const TextStats& s) { return safe_div(s.short_words, s.words); }},
        {"capitalized_word_ratio", "words starting uppercase / words", [](const TextStats& s) { return safe_div(s.capitalized, s.words); }},
        {"all_caps_word_ratio", "all-uppercase words / words", [](const TextStats& s) { return safe_div(s.all_caps, s.words); }},
        {"numeric_word_ratio", "words with digits and no letters / words", [](const TextStats& s) { return safe_div(s.numeric, s.words); }},
        {"placeholder_ratio", "anonymization placeholders / words", [](const TextStats& s) { return safe_div(s.placeholders, s.words); }},
        {"blank_line_ratio", "blank lines / lines", [](const TextStats& s) { return safe_div(s.blank_lines, s.lines); }},
        {"duplicate_line_ratio", "repeated non-blank lines / non-blank lines", [](const TextStats& s) { return safe_div(s.duplicate_lines, s.nonblank_lines); }},
        {"markup_ratio", "markup characters / characters", [](const TextStats& s) { return safe_div(s.markup, s.chars); }},
        {"repeated_char_ratio", "characters equal to their predecessor / characters", [](const TextStats& s) { return safe_div(s.repeats, s.chars); }},
        {"max_word_length", "longest word in characters", [](const TextStats& s) { return s.max_word_len; }},
    };
    return table;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

FeatureRegistry::FeatureRegistry(std::vector<FeatureSpec> specs) : specs_(std::move(specs)) {
    const auto& table = extractor_table();
    std::unordered_set<std::string> names;
    for (const auto& spec : specs_) {
        if (spec.name.empty()) throw ConfigError("feature registry: empty feature name");
        if (!names.insert(spec.name).second) throw ConfigError("feature registry: duplicate name '" + spec.name + "'");
        auto it = std::find_if(table.begin(), table.end(), [&](const ExtractorDef& d) { return spec.extractor == d.id; });
        if (it == table.end()) {
            throw ConfigError("feature registry: unknown extractor '" + spec.extractor + "' for '" + spec.name + "'");
        }
        index_.push_back(static_cast<std::size_t>(it - table.begin()));
    }
}

FeatureRegistry FeatureRegistry::builtin() {
    std::vector<FeatureSpec> specs;
    for (const auto& d : extractor_table()) specs.push_back({d.id, d.id, d.description});
    return FeatureRegistry(std::move(specs));
}

const std::vector<std::string>& FeatureRegistry::extractor_ids() {
    static const std::vector<std::string> ids = [] {
        std::vector<std::string> v;
        for (const auto& d : extractor_table()) v.emplace_back(d.id);
        return v;
    }();
    return ids;
}

const std::set<std::string>& FeatureRegistry::default_stopwords() {
    static const std::set<std::string> words = {
        // Polish
        "a", "aby", "ale", "bo", "by", "być", "czy", "dla", "do", "i", "ich", "jak", "jest", "jego", "już",
        "lub", "ma", "mnie", "na", "nie", "o", "od", "oraz", "po", "pod", "przez", "przy", "się", "są", "ta",
        "tak", "te", "to", "tu", "w", "we", "z", "za", "że", "ze",
        // English
        "an", "and", "are", "as", "at", "be", "but", "by", "for", "from", "in", "is", "it", "of", "on", "or",
        "that", "the", "this", "was", "with",
    };
    return words;
}

FeatureRegistry FeatureRegistry::parse(std::string_view text) {
    std::vector<FeatureSpec> specs;
    std::set<std::string> stop;
    bool custom_stop = false;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.rfind("@stopwords", 0) == 0) {
            custom_stop = true;
            std::istringstream ws(t.substr(10));
            std::string w;
            while (ws >> w) stop.insert(w);
            continue;
        }
        FeatureSpec spec;
        const auto tab1 = t.find('\t');
        if (tab1 == std::string::npos) {
            spec.name = spec.extractor = t;
        } else {
            spec.name = trim(t.substr(0, tab1));
            const auto tab2 = t.find('\t', tab1 + 1);
            spec.extractor = trim(t.substr(tab1 + 1, tab2 == std::string::npos ? std::string::npos : tab2 - tab1 - 1));
            if (tab2 != std::string::npos) spec.description = trim(t.substr(tab2 + 1));
        }
        specs.push_back(std::move(spec));
    }
    if (specs.empty()) throw ConfigError("feature registry: no features listed");
    FeatureRegistry reg(std::move(specs));
    if (custom_stop) reg.set_stopwords(std::move(stop));
    return reg;
}

FeatureRegistry FeatureRegistry::load(const std::filesystem::path& path) {
    try {
        return parse(read_file(path));
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
}

std::string FeatureRegistry::serialize() const {
    std::string out = "# name\textractor\tdescription\n";
    for (const auto& s : specs_) out += s.name + '\t' + s.extractor + '\t' + s.description + '\n';
    if (stopwords_ != default_stopwords()) {
        out += "@stopwords";
        for (const auto& w : stopwords_) out += ' ' + w;
        out += '\n';
    }
    return out;
}

std::vector<std::string> FeatureRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& s : specs_) out.push_back(s.name);
    return out;
}

std::vector<float> FeatureRegistry::extract(std::string_view text) const {
    if (text.empty()) throw DataError("extract_features: empty text");
    const TextStats st = compute_stats(text, stopwords_);
    const auto& table = extractor_table();
    std::vector<float> out;
    out.reserve(specs_.size());
    for (std::size_t idx : index_) out.push_back(static_cast<float>(table[idx].fn(st)));
    return out;
}

}  // namespace wlab::corpus
