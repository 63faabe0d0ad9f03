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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wlab::corpus {

enum class QualityClass : int { High = 0, Medium = 1, Low = 2 };
inline constexpr int kNumQualityClasses = 3;

std::string quality_class_name(int cls);
int parse_quality_class(const std::string& label);  // throws DataError

struct LabeledSample {
    std::vector<float> features;
    int label = 0;
};

struct GbtConfig {
    std::size_t rounds = 60;  // trees per class
    std::size_t max_depth = 3;
    double learning_rate = 0.3;
    double lambda = 1.0;            // L2 penalty on leaf values
    double min_child_hessian = 1e-3;
    double subsample = 1.0;         // row fraction per round, drawn from the seed
    std::uint64_t seed = 0;

    void validate() const;
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0;       // go left when x < threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0;

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
    std::int32_t cls = 0;
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(const float* x) const;
    friend bool operator==(const Tree&, const Tree&) = default;
};

struct GbtModel {
    std::int32_t num_classes = kNumQualityClasses;
    std::int32_t num_features = 0;
    std::vector<std::string> feature_names;  // optional; checked against the registry when present
    std::vector<Tree> trees;

    std::vector<double> raw_scores(const std::vector<float>& x) const;
    std::vector<double> predict_proba(const std::vector<float>& x) const;
    int predict(const std::vector<float>& x) const;

    std::string serialize() const;
    static GbtModel deserialize(const std::string& bytes);  // throws FormatError
    void save(const std::filesystem::path& path) const;
    static GbtModel load(const std::filesystem::path& path);

    friend bool operator==(const GbtModel&, const GbtModel&) = default;
};

inline constexpr std::uint32_t kGbtFormatVersion = 1;

// Softmax-objective boosting with exact greedy splits. Training runs on a
// canonical ordering of the samples, so the result does not depend on the
// order they were passed in.
GbtModel gbt_train(const std::vector<LabeledSample>& samples, const GbtConfig& cfg, int num_classes = kNumQualityClasses);

struct ValidationReport {
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
    std::vector<double> precision, recall, f1;        // per class
    double macro_precision = 0, macro_recall = 0, macro_f1 = 0, accuracy = 0;

    std::string to_json() const;
};

ValidationReport validation_report(const std::vector<int>& truth, const std::vector<int>& predicted, int num_classes);
ValidationReport gbt_validate(const GbtModel& model, const std::vector<LabeledSample>& holdout);

enum class GateDecision { Kept, Excluded };
inline constexpr double kDefaultGateThreshold = 0.90;

// Kept iff P(high) strictly exceeds the threshold.
GateDecision gate(double p_high, double threshold = kDefaultGateThreshold);

// Three Gaussian clusters in feature space, one per class, with balanced
// labels. Used as a sanity benchmark for the classifier.
std::vector<LabeledSample> make_cluster_benchmark(std::size_t n, std::size_t dims, std::uint64_t seed);

}  // namespace wlab::corpus
