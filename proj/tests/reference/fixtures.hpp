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

// Seeded synthetic data shared by unit and acceptance tests.

#include <string>
#include <vector>

#include <json.hpp>

#include "wlab/rng.hpp"
#include "wlab/model/model.hpp"
#include "wlab/train/dataset.hpp"
#include "wlab/train/trainer.hpp"

namespace fixtures {

struct Pair {
    std::string prompt;
    std::string response;
    std::string quality;
};

// Short copy and reverse instructions over a small vocabulary: learnable at
// desk scale, with a response that depends on the prompt.
inline std::vector<Pair> instruction_pairs(std::size_t n, std::uint64_t seed) {
    static const char* words[] = {"kot", "pies", "dom", "las", "rzeka", "most", "sad", "pole"};
    static const char* tiers[] = {"high", "medium", "low"};
    wlab::Rng rng(seed);
    std::vector<Pair> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> picked;
        for (int k = 0; k < 3; ++k) picked.push_back(words[rng.below(8)]);
        const bool reverse = rng.below(2) == 1;
        std::string prompt = reverse ? "odwroc: " : "powtorz: ";
        std::string response;
        for (int k = 0; k < 3; ++k) {
            prompt += (k ? " " : "") + picked[static_cast<std::size_t>(k)];
            response += (k ? " " : "") + picked[static_cast<std::size_t>(reverse ? 2 - k : k)];
        }
        out.push_back({prompt, response, tiers[rng.below(3)]});
    }
    return out;
}

inline std::vector<wlab::train::InstructionSample> instruction_samples(std::size_t n, std::uint64_t seed,
                                                                       bool use_quality = true) {
    std::vector<wlab::train::InstructionSample> out;
    for (const auto& p : instruction_pairs(n, seed)) {
        const float w = !use_quality ? 1.0f : p.quality == "high" ? 1.0f : p.quality == "medium" ? 0.7f : 0.5f;
        out.push_back(wlab::train::ChatTemplate::render(p.prompt, p.response, w));
    }
    return out;
}

inline std::string instruction_jsonl(std::size_t n, std::uint64_t seed) {
    std::string out;
    for (const auto& p : instruction_pairs(n, seed)) {
        out += nlohmann::json{{"prompt", p.prompt}, {"response", p.response}, {"quality", p.quality}}.dump() + "\n";
    }
    return out;
}

// Concatenated chat-rendered instruction samples, cut to n tokens.
inline std::vector<wlab::nn::TokenId> token_stream(std::size_t n, std::uint64_t seed) {
    std::vector<wlab::nn::TokenId> out;
    for (std::uint64_t s = seed;; ++s) {
        for (const auto& sample : instruction_samples(16, s)) {
            for (auto t : sample.tokens) {
                out.push_back(t);
                if (out.size() == n) return out;
            }
        }
    }
}

// Desk model after a short seeded run on the instruction fixture; its
// next-token distributions are peaked, unlike a freshly initialized model.
inline wlab::model::TinyModel trained_desk_model(std::size_t iters = 150, std::uint64_t seed = 1) {
    auto m = wlab::model::init_model(wlab::model::ModelConfig::desk(), seed);
    wlab::train::TrainConfig t;
    t.batch_size = 8;
    t.epochs = 1000;
    t.max_iters = iters;
    t.seed = seed;
    t.schedule.base_lr = 2e-3;
    t.schedule.min_lr = 2e-4;
    t.schedule.warmup_iters = iters / 10;
    t.schedule.total_iters = iters;
    t.schedule.baseline_batch_tokens = 256;
    wlab::train::train(m, instruction_samples(64, seed), t);
    return m;
}

// Random documents built from fragments that stress the cleaner: addresses,
// URLs, digit runs, line endings, control and invalid bytes, blank lines.
inline std::string fuzz_document(wlab::Rng& rng) {
    static const char* fragments[] = {
        "Ala ma kota", "zażółć gęślą jaźń", " ", " ", "\n", "\n\n\n\n", "\r\n", "\r", "\t", "\x01", "\x7f",
        "\xc2\x85", "\xff", "\xc3", "\xe2\x82", "a.b@x.pl", "@", "jan@", "@host.com", "kontakt: ewa_k@firma.com.pl",
        "https://x.y/z", "http://", "www.example.org/a?b=1.", "(https://a.pl/b)", "+48 600 700 800",
        "123-456-789", "12345678", "1234567890123456", "2024", "-", "+", ".", ",", "<EMAIL>", "<URL>",
        "<PHONE>", "mail@<URL>", "  \n  \n  \n  \n", "…", "\"cytat\"",
    };
    constexpr std::size_t n_frag = sizeof(fragments) / sizeof(fragments[0]);
    std::string out;
    const auto parts = 1 + rng.below(40);
    for (std::uint64_t i = 0; i < parts; ++i) {
        if (rng.below(8) == 0) {
            out += static_cast<char>(rng.below(256));
        } else {
            out += fragments[rng.below(n_frag)];
        }
    }
    return out;
}

// JSON-lines documents mixing clean prose, fuzzed noise and contact details.
inline std::string documents_jsonl(std::size_t n, std::uint64_t seed) {
    wlab::Rng rng(seed);
    static const char* good[] = {
        "Wczoraj odwiedzilismy muzeum narodowe w Krakowie. Wystawa byla bardzo ciekawa i dobrze przygotowana.",
        "Ustawa wchodzi w zycie po uplywie czternastu dni od dnia ogloszenia. Minister okresli szczegoly.",
        "Rzeka plynie spokojnie przez doline, a nad nia unosza sie mgly. Rybacy wyplywaja o swicie."};
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string text = rng.below(2) ? std::string(good[rng.below(3)]) : fuzz_document(rng);
        if (rng.below(4) == 0) text += " Pisz na jan.kowalski@example.com lub dzwon +48 600 700 800.";
        out += nlohmann::json{{"id", "d" + std::to_string(i)}, {"text", text}}.dump(-1, ' ', false,
                                                                                    nlohmann::json::error_handler_t::replace) +
               "\n";
    }
    return out;
}

// Labeled classifier training texts, six copies of three per class.
inline std::string labeled_jsonl() {
    static const char* high[] = {"To jest starannie napisany akapit o historii miasta i jego mieszkancach.",
                                 "Autor omawia przyczyny zjawiska, podaje przyklady i wyciaga wnioski.",
                                 "Raport przedstawia wyniki badan w sposob jasny i uporzadkowany."};
    static const char* medium[] = {"fajny tekst ale krotki", "kup teraz tanio okazja", "no i tak to bylo wiesz"};
    static const char* low[] = {"!!! $$$ ### ???", "a a a a a a a a a", "<<<>>> 1234 5678 %%%"};
    std::string out;
    for (int r = 0; r < 6; ++r) {
        for (int i = 0; i < 3; ++i) {
            out += nlohmann::json{{"text", high[i]}, {"label", "high"}}.dump() + "\n";
            out += nlohmann::json{{"text", medium[i]}, {"label", "medium"}}.dump() + "\n";
            out += nlohmann::json{{"text", low[i]}, {"label", "low"}}.dump() + "\n";
        }
    }
    return out;
}

}  // namespace fixtures
