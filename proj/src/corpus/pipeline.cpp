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

#include "wlab/corpus/pipeline.hpp"

#include <cmath>
#include <istream>
#include <optional>
#include <ostream>

#include <json.hpp>

#include "wlab/error.hpp"
#include "wlab/parallel.hpp"

namespace wlab::corpus {

using nlohmann::json;

namespace {

constexpr std::size_t kChunkLines = 512;

json parse_object(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DataError("expected a JSON object");
    return j;
}

std::string id_field(const json& j) {
    auto it = j.find("id");
    if (it == j.end()) throw DataError("missing \"id\"");
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return it->dump();
    throw DataError("\"id\" must be a string or integer");
}

struct LineResult {
    std::optional<std::string> output;
    std::optional<std::string> error;
};

std::string decision_name(GateDecision d) { return d == GateDecision::Kept ? "kept" : "excluded"; }

}  // namespace

Document parse_document(std::string_view line) {
    const json j = parse_object(line);
    Document d;
    d.id = id_field(j);
    auto it = j.find("text");
    if (it == j.end() || !it->is_string()) throw DataError("missing string field \"text\"");
    d.text = it->get<std::string>();
    return d;
}

QualityRecord parse_quality_record(std::string_view line) {
    const json j = parse_object(line);
    QualityRecord r;
    r.doc_id = id_field(j);
    try {
        r.text = j.at("text").get<std::string>();
        r.features = j.at("features").get<std::vector<float>>();
        const auto& p = j.at("probs");
        r.probs = {p.at("high").get<double>(), p.at("medium").get<double>(), p.at("low").get<double>()};
        const auto d = j.at("decision").get<std::string>();
        if (d != "kept" && d != "excluded") throw DataError("decision must be kept or excluded");
        r.decision = d == "kept" ? GateDecision::Kept : GateDecision::Excluded;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed quality record: ") + e.what());
    }
    double sum = 0;
    for (double p : r.probs) {
        if (!(p >= 0 && p <= 1)) throw DataError("probability outside [0, 1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw DataError("probabilities do not sum to 1");
    return r;
}

std::string document_to_json(const Document& doc, const std::vector<Edit>* edits) {
    json j;
    j["id"] = doc.id;
    j["text"] = doc.text;
    if (edits) {
        json e = json::array();
        for (const auto& ed : *edits) e.push_back({{"kind", edit_kind_name(ed.kind)}, {"offset", ed.offset}});
        j["edits"] = std::move(e);
    }
    return j.dump();
}

std::string quality_record_to_json(const QualityRecord& rec) {
    json j;
    j["id"] = rec.doc_id;
    j["text"] = rec.text;
    j["features"] = rec.features;
    j["probs"] = {{"high", rec.probs[0]}, {"medium", rec.probs[1]}, {"low", rec.probs[2]}};
    j["decision"] = decision_name(rec.decision);
    return j.dump();
}

void check_model_matches_registry(const GbtModel& model, const FeatureRegistry& registry) {
    if (model.num_classes != kNumQualityClasses) {
        throw FormatError("classifier has " + std::to_string(model.num_classes) + " classes, expected 3");
    }
    if (static_cast<std::size_t>(model.num_features) != registry.size()) {
        throw FormatError("classifier expects " + std::to_string(model.num_features) + " features, registry has " +
                          std::to_string(registry.size()));
    }
    if (!model.feature_names.empty() && model.feature_names != registry.names()) {
        throw FormatError("classifier was trained on a different feature registry");
    }
}

QualityRecord classify_document(const Document& doc, const FeatureRegistry& registry, const GbtModel& model,
                                double threshold) {
    QualityRecord r;
    r.doc_id = doc.id;
    r.text = doc.text;
    r.features = registry.extract(doc.text);
    const auto p = model.predict_proba(r.features);
    r.probs = {p[0], p[1], p[2]};
    r.decision = gate(r.probs[0], threshold);
    return r;
}

PipelineStats run_stage(Stage stage, std::istream& in, std::ostream& out, const PipelineContext& ctx,
                        const PipelineOptions& opts) {
    if ((stage == Stage::Classify || stage == Stage::Full) && (!ctx.registry || !ctx.model)) {
        throw ConfigError("classification needs a feature registry and a model");
    }
    if (ctx.registry && ctx.model) check_model_matches_registry(*ctx.model, *ctx.registry);

    auto process = [&](std::string_view line) -> std::optional<std::string> {
        switch (stage) {
            case Stage::Clean: {
                Document d = parse_document(line);
                auto cleaned = clean_text(d.text);
                d.text = std::move(cleaned.text);
                return document_to_json(d, &cleaned.edits);
            }
            case Stage::Classify:
                return quality_record_to_json(
                    classify_document(parse_document(line), *ctx.registry, *ctx.model, opts.threshold));
            case Stage::Gate: {
                QualityRecord r = parse_quality_record(line);
                r.decision = gate(r.probs[0], opts.threshold);
                if (opts.kept_only && r.decision != GateDecision::Kept) return std::nullopt;
                return quality_record_to_json(r);
            }
            case Stage::Full: {
                Document d = parse_document(line);
                d.text = clean_text(d.text).text;
                QualityRecord r = classify_document(d, *ctx.registry, *ctx.model, opts.threshold);
                if (opts.kept_only && r.decision != GateDecision::Kept) return std::nullopt;
                return quality_record_to_json(r);
            }
        }
        return std::nullopt;
    };

    PipelineStats stats;
    std::vector<std::pair<std::size_t, std::string>> chunk;
    std::vector<LineResult> results;
    std::size_t line_no = 0;
    auto flush = [&] {
        results.assign(chunk.size(), LineResult{});
        parallel_for(chunk.size(), opts.jobs, [&](std::size_t i) {
            try {
                results[i].output = process(chunk[i].second);
            } catch (const DataError& e) {
                results[i].error = e.what();
            }
        });
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            if (results[i].error) {
                const std::string msg = "line " + std::to_string(chunk[i].first) + ": " + *results[i].error;
                if (opts.strict) throw DataError(msg);
                ++stats.skipped;
                stats.warnings.push_back(msg);
            } else if (results[i].output) {
                out << *results[i].output << '\n';
                ++stats.written;
            }
        }
        chunk.clear();
    };
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        ++stats.read;
        chunk.emplace_back(line_no, std::move(line));
        if (chunk.size() == kChunkLines) flush();
    }
    flush();
    return stats;
}

}  // namespace wlab::corpus
