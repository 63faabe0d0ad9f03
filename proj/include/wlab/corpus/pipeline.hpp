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

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "wlab/corpus/clean.hpp"
#include "wlab/corpus/features.hpp"
#include "wlab/corpus/gbt.hpp"

namespace wlab::corpus {

struct Document {
    std::string id;
    std::string text;
};

struct QualityRecord {
    std::string doc_id;
    std::string text;
    std::vector<float> features;
    std::array<double, 3> probs{};  // high, medium, low
    GateDecision decision = GateDecision::Excluded;
};

// Throw DataError on malformed input.
Document parse_document(std::string_view line);
QualityRecord parse_quality_record(std::string_view line);

std::string document_to_json(const Document& doc, const std::vector<Edit>* edits = nullptr);
std::string quality_record_to_json(const QualityRecord& rec);

QualityRecord classify_document(const Document& doc, const FeatureRegistry& registry, const GbtModel& model,
                                 double threshold);

// Throws FormatError when the model was trained on a different feature set.
void check_model_matches_registry(const GbtModel& model, const FeatureRegistry& registry);

enum class Stage { Clean, Classify, Gate, Full };

struct PipelineOptions {
    std::size_t jobs = 1;
    bool strict = false;  // the first malformed line throws DataError
    double threshold = kDefaultGateThreshold;
    bool kept_only = false;  // gate and full stages: drop excluded records
};

struct PipelineContext {
    const FeatureRegistry* registry = nullptr;  // classify and full stages
    const GbtModel* model = nullptr;
};

struct PipelineStats {
    std::size_t read = 0;
    std::size_t written = 0;
    std::size_t skipped = 0;
    std::vector<std::string> warnings;  // one per skipped line, "line N: reason"
};

// Streams JSON lines from `in` to `out`. Documents are processed in parallel
// chunks and written in input order. Blank lines are ignored.
PipelineStats run_stage(Stage stage, std::istream& in, std::ostream& out, const PipelineContext& ctx,
                        const PipelineOptions& opts);

}  // namespace wlab::corpus
