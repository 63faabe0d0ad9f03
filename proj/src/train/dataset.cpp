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

#include "wlab/train/dataset.hpp"

#include <fstream>
#include <json.hpp>

#include "wlab/error.hpp"
#include "wlab/train/loss.hpp"

namespace wlab::train {

using nlohmann::json;

void InstructionSample::validate(std::size_t vocab_size) const {
    if (tokens.size() != loss_mask.size()) {
        throw DataError("sample: " + std::to_string(tokens.size()) + " tokens but " + std::to_string(loss_mask.size()) +
                        " mask entries");
    }
    if (!(weight > 0.0f && weight <= 1.0f)) throw DataError("sample: weight " + std::to_string(weight) + " outside (0, 1]");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] < 0 || static_cast<std::size_t>(tokens[i]) >= vocab_size) {
            throw DataError("sample: token id " + std::to_string(tokens[i]) + " at position " + std::to_string(i) +
                            " outside vocabulary of " + std::to_string(vocab_size));
        }
        if (loss_mask[i] > 1) throw DataError("sample: mask entries must be 0 or 1");
    }
    if (scored_tokens() == 0) throw DataError("sample: loss mask selects no token (all-false mask)");
}

std::size_t InstructionSample::scored_tokens() const {
    std::size_t n = 0;
    for (std::size_t i = 1; i < loss_mask.size(); ++i) n += loss_mask[i] ? 1 : 0;
    return n;
}

std::vector<TokenId> ChatTemplate::encode_bytes(std::string_view text) {
    std::vector<TokenId> ids;
    ids.reserve(text.size());
    for (unsigned char c : text) ids.push_back(byte_token(c));
    return ids;
}

std::string ChatTemplate::decode(std::span<const TokenId> ids) {
    std::string out;
    for (TokenId id : ids) {
        switch (id) {
            case kPad: out += "<pad>"; break;
            case kBos: out += "<bos>"; break;
            case kEos: out += "<eos>"; break;
            case kUser: out += "<user>"; break;
            case kAssistant: out += "<assistant>"; break;
            default:
                if (id >= kFirstByte && id < kFirstByte + 256) {
                    out += static_cast<char>(id - kFirstByte);
                } else {
                    out += "<" + std::to_string(id) + ">";
                }
        }
    }
    return out;
}

InstructionSample ChatTemplate::render(std::string_view prompt, std::string_view response, float weight) {
    InstructionSample s;
    s.weight = weight;
    auto push = [&](TokenId id, bool scored) {
        s.tokens.push_back(id);
        s.loss_mask.push_back(scored ? 1 : 0);
    };
    push(kBos, false);
    push(kUser, false);
    for (TokenId id : encode_bytes(prompt)) push(id, false);
    push(kAssistant, false);
    for (TokenId id : encode_bytes(response)) push(id, true);
    push(kEos, false);
    return s;
}

InstructionSample parse_sample_line(std::string_view line, std::size_t vocab_size) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("expected a JSON object");
    InstructionSample s;
    try {
        if (j.contains("tokens")) {
            s.tokens = j.at("tokens").get<std::vector<TokenId>>();
            for (int m : j.at("mask").get<std::vector<int>>()) {
                if (m != 0 && m != 1) throw DataError("mask entries must be 0 or 1");
                s.loss_mask.push_back(static_cast<std::uint8_t>(m));
            }
            s.weight = j.value("weight", 1.0f);
        } else if (j.contains("prompt")) {
            const auto tier = parse_quality(j.at("quality").get<std::string>());
            s = ChatTemplate::render(j.at("prompt").get<std::string>(), j.at("response").get<std::string>(),
                                     weight_for_quality(tier));
        } else {
            throw DataError("expected either {prompt, response, quality} or {tokens, mask, weight}");
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("bad field: ") + e.what());
    }
    s.validate(vocab_size);
    return s;
}

std::vector<InstructionSample> load_dataset(const std::filesystem::path& path, std::size_t vocab_size) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset '" + path.string() + "'");
    std::vector<InstructionSample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_sample_line(line, vocab_size));
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace wlab::train
