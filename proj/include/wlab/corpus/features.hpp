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

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace wlab::corpus {

struct FeatureSpec {
    std::string name;
    std::string extractor;
    std::string description;
};

// Ordered feature list. The order is the serialization contract for feature
// vectors and for classifier models trained on them.
class FeatureRegistry {
public:
    FeatureRegistry() = default;
    explicit FeatureRegistry(std::vector<FeatureSpec> specs);

    // All built-in extractors in their canonical order.
    static FeatureRegistry builtin();

    // Text format: one feature per line, "name<TAB>extractor<TAB>description",
    // with the description optional. Lines starting with '#' are comments.
    // An optional "@stopwords w1 w2 ..." line replaces the stopword list.
    static FeatureRegistry parse(std::string_view text);
    static FeatureRegistry load(const std::filesystem::path& path);
    std::string serialize() const;

    static const std::vector<std::string>& extractor_ids();
    static const std::set<std::string>& default_stopwords();

    const std::vector<FeatureSpec>& features() const { return specs_; }
    std::size_t size() const { return specs_.size(); }
    std::vector<std::string> names() const;

    void set_stopwords(std::set<std::string> words) { stopwords_ = std::move(words); }
    const std::set<std::string>& stopwords() const { return stopwords_; }

    // Throws DataError on empty text.
    std::vector<float> extract(std::string_view text) const;

private:
    std::vector<FeatureSpec> specs_;
    std::vector<std::size_t> index_;  // extractor slot per feature
    std::set<std::string> stopwords_ = default_stopwords();
};

inline std::vector<float> extract_features(std::string_view text, const FeatureRegistry& registry) {
    return registry.extract(text);
}

}  // namespace wlab::corpus
