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

#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "wlab/corpus/features.hpp"
#include "wlab/error.hpp"
#include "wlab/io.hpp"

using namespace wlab;
using corpus::FeatureRegistry;

namespace {

std::map<std::string, float> extract_named(const FeatureRegistry& reg, std::string_view text) {
    const auto v = reg.extract(text);
    std::map<std::string, float> out;
    const auto names = reg.names();
    for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = v[i];
    return out;
}

}  // namespace

TEST_CASE("built-in registry has forty features in a fixed order") {
    const auto reg = FeatureRegistry::builtin();
    CHECK(reg.size() == 40);
    CHECK(reg.names().front() == "char_count");
    CHECK(reg.names().back() == "max_word_length");
    CHECK(FeatureRegistry::extractor_ids() == reg.names());
}

TEST_CASE("every feature matches the frozen oracle on the mixed document") {
    const auto text = read_file(std::string(WLAB_TEST_DATA_DIR) + "/features_doc.txt");
    const auto reg = FeatureRegistry::builtin();
    const auto got = extract_named(reg, text);
    std::ifstream in(std::string(WLAB_TEST_DATA_DIR) + "/features_expected.tsv");
    REQUIRE(in);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string name;
        double expected = 0;
        ls >> name >> expected;
        INFO(name);
        REQUIRE(got.count(name) == 1);
        CHECK(got.at(name) == doctest::Approx(expected).epsilon(1e-5));
        ++rows;
    }
    CHECK(rows == reg.size());
}

TEST_CASE("simple sentence") {
    auto f = extract_named(FeatureRegistry::builtin(), "Ala ma kota.");
    CHECK(f["char_count"] == 12);
    CHECK(f["word_count"] == 3);
    CHECK(f["sentence_count"] == 1);
    CHECK(f["punctuation_ratio"] == doctest::Approx(1.0 / 12));
    CHECK(f["stopword_ratio"] == doctest::Approx(1.0 / 3));
    CHECK(f["capitalized_word_ratio"] == doctest::Approx(1.0 / 3));
    CHECK(f["mean_word_length"] == doctest::Approx(3.0));
}

TEST_CASE("repeated word type-token ratio") {
    auto f = extract_named(FeatureRegistry::builtin(), "kot kot kot kot kot kot kot kot kot kot");
    CHECK(f["word_count"] == 10);
    CHECK(f["type_token_ratio"] == doctest::Approx(0.1));
    CHECK(f["hapax_ratio"] == 0.0f);
    CHECK(f["std_word_length"] == 0.0f);
}

TEST_CASE("sentence splitting needs whitespace after the terminator") {
    auto f = extract_named(FeatureRegistry::builtin(), "Wersja 2.5 jest nowa. Czy działa? Tak!");
    CHECK(f["sentence_count"] == 3);
    CHECK(f["mean_sentence_length"] == doctest::Approx(7.0 / 3));
}

TEST_CASE("custom registry parse and serialize") {
    const auto reg = FeatureRegistry::parse(
        "# comment\n"
        "chars\tchar_count\tlength in code points\n"
        "ttr\ttype_token_ratio\n"
        "@stopwords foo bar\n");
    CHECK(reg.size() == 2);
    CHECK(reg.names() == std::vector<std::string>{"chars", "ttr"});
    CHECK(reg.stopwords() == std::set<std::string>{"bar", "foo"});
    const auto again = FeatureRegistry::parse(reg.serialize());
    CHECK(again.names() == reg.names());
    CHECK(again.stopwords() == reg.stopwords());
    CHECK(again.extract("foo x") == reg.extract("foo x"));

    // Stopword list changes only the stopword feature.
    const auto sw = FeatureRegistry::parse("stop\tstopword_ratio\n@stopwords foo\n");
    CHECK(sw.extract("foo the")[0] == doctest::Approx(0.5));
}

TEST_CASE("registry errors") {
    CHECK_THROWS_AS(FeatureRegistry::parse("x\tno_such_extractor\n"), ConfigError);
    CHECK_THROWS_AS(FeatureRegistry::parse("x\tchar_count\nx\tword_count\n"), ConfigError);
    CHECK_THROWS_AS(FeatureRegistry::parse("# only a comment\n"), ConfigError);
    CHECK_THROWS_AS(FeatureRegistry::load("/nonexistent/registry.tsv"), ConfigError);
    CHECK_THROWS_AS(FeatureRegistry::builtin().extract(""), DataError);
}

TEST_CASE("whitespace-only text yields zero word statistics") {
    auto f = extract_named(FeatureRegistry::builtin(), "   \n");
    CHECK(f["word_count"] == 0);
    CHECK(f["type_token_ratio"] == 0);
    CHECK(f["blank_line_ratio"] == 1);
}
