#!/usr/bin/env python3
# Copyright 2026 The WLab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Independent per-feature oracle for the built-in feature registry.

Each feature is computed directly from its written definition with Python
string methods. The output is frozen into tests/data/features_expected.tsv;
rerun this script only when a definition deliberately changes:

    python3 tests/reference/feature_oracle.py tests/data/features_doc.txt \
        > tests/data/features_expected.tsv
"""

import math
import re
import string
import sys

STOPWORDS = set("""
a aby ale bo by być czy dla do i ich jak jest jego już lub ma mnie na nie o od oraz po pod przez przy się są ta
tak te to tu w we z za że ze an and are as at be but by for from in is it of on or that the this was with
""".split())

PUNCT = set(string.punctuation) | set("¡«·»¿") | {chr(c) for c in range(0x2010, 0x205F)}
QUOTES = set("\"'«»") | {chr(c) for c in range(0x2018, 0x2020)}
DASHES = {"-"} | {chr(c) for c in range(0x2010, 0x2016)}
MARKUP = set("<>{}[]|#*_=~`\\/")


def core_of(token):
    b, e = 0, len(token)
    while b < e and token[b] in PUNCT:
        b += 1
    while e > b and token[e - 1] in PUNCT:
        e -= 1
    return token[b:e]


def mean_std(xs):
    if not xs:
        return 0.0, 0.0
    m = sum(xs) / len(xs)
    return m, math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs))


def ratio(a, b):
    return a / b if b else 0.0


def features(text):
    n = len(text)
    tokens = text.split()
    cores = [c for c in (core_of(t) for t in tokens) if c]
    words = len(cores)
    lowered = [c.lower() for c in cores]
    counts = {}
    for w in lowered:
        counts[w] = counts.get(w, 0) + 1

    sentences = []
    for seg in re.split(r"[.!?…]+(?=\s|$)", text):
        if any(ch.isalnum() for ch in seg):
            sentences.append(sum(1 for t in seg.split() if any(ch.isalnum() for ch in t)))

    lines = text.split("\n")
    if text.endswith("\n"):
        lines = lines[:-1]
    blank = [not ln.strip() for ln in lines]
    paragraphs = sum(1 for i, b in enumerate(blank) if not b and (i == 0 or blank[i - 1]))
    seen, dup = set(), 0
    for ln, b in zip(lines, blank):
        if b:
            continue
        key = ln.strip()
        if key in seen:
            dup += 1
        seen.add(key)
    nonblank = sum(1 for b in blank if not b)

    def count(pred):
        return sum(1 for ch in text if pred(ch))

    ellipses = text.count("…") + len(re.findall(r"(?<!\.)\.\.\.", text))
    wl_mean, wl_std = mean_std([len(c) for c in cores])
    sl_mean, sl_std = mean_std(sentences)
    ll_mean, _ = mean_std([len(ln) for ln in lines])

    def letters(c):
        return [ch for ch in c if ch.isalpha()]

    return [
        ("char_count", n),
        ("word_count", words),
        ("sentence_count", len(sentences)),
        ("line_count", len(lines)),
        ("paragraph_count", paragraphs),
        ("mean_word_length", wl_mean),
        ("std_word_length", wl_std),
        ("mean_sentence_length", sl_mean),
        ("std_sentence_length", sl_std),
        ("mean_line_length", ll_mean),
        ("type_token_ratio", ratio(len(counts), words)),
        ("hapax_ratio", ratio(sum(1 for v in counts.values() if v == 1), words)),
        ("punctuation_ratio", ratio(count(lambda ch: ch in PUNCT), n)),
        ("comma_ratio", ratio(text.count(","), n)),
        ("period_ratio", ratio(text.count("."), n)),
        ("question_ratio", ratio(count(lambda ch: ch in "?¿"), n)),
        ("exclamation_ratio", ratio(count(lambda ch: ch in "!¡"), n)),
        ("colon_ratio", ratio(text.count(":"), n)),
        ("semicolon_ratio", ratio(text.count(";"), n)),
        ("quote_ratio", ratio(count(lambda ch: ch in QUOTES), n)),
        ("dash_ratio", ratio(count(lambda ch: ch in DASHES), n)),
        ("bracket_ratio", ratio(count(lambda ch: ch in "()[]{}"), n)),
        ("ellipsis_ratio", ratio(ellipses, n)),
        ("uppercase_ratio", ratio(count(str.isupper), n)),
        ("digit_ratio", ratio(count(lambda ch: "0" <= ch <= "9"), n)),
        ("letter_ratio", ratio(count(str.isalpha), n)),
        ("whitespace_ratio", ratio(count(str.isspace), n)),
        ("non_ascii_ratio", ratio(count(lambda ch: ord(ch) > 127), n)),
        ("stopword_ratio", ratio(sum(1 for w in lowered if w in STOPWORDS), words)),
        ("long_word_ratio", ratio(sum(1 for c in cores if len(c) >= 10), words)),
        ("short_word_ratio", ratio(sum(1 for c in cores if len(c) <= 3), words)),
        ("capitalized_word_ratio", ratio(sum(1 for c in cores if c[0].isupper()), words)),
        ("all_caps_word_ratio",
         ratio(sum(1 for c in cores if len(letters(c)) >= 2 and all(ch.isupper() for ch in letters(c))), words)),
        ("numeric_word_ratio",
         ratio(sum(1 for c in cores if any("0" <= ch <= "9" for ch in c) and not letters(c)), words)),
        ("placeholder_ratio",
         ratio(sum(1 for t in tokens if core_of(t) and any(p in t for p in ("<EMAIL>", "<URL>", "<PHONE>"))), words)),
        ("blank_line_ratio", ratio(sum(blank), len(lines))),
        ("duplicate_line_ratio", ratio(dup, nonblank)),
        ("markup_ratio", ratio(count(lambda ch: ch in MARKUP), n)),
        ("repeated_char_ratio", ratio(sum(1 for i in range(1, n) if text[i] == text[i - 1]), n)),
        ("max_word_length", max((len(c) for c in cores), default=0)),
    ]


def main():
    with open(sys.argv[1], encoding="utf-8") as f:
        text = f.read()
    for name, value in features(text):
        print(f"{name}\t{value!r}")


if __name__ == "__main__":
    main()
