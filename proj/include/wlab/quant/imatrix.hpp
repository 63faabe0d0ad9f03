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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wlab/model/model.hpp"

namespace wlab::quant {

// Per linear weight, the running sum over calibration tokens of the squared
// activation entering each input column.
class ImportanceMatrix {
public:
    std::map<std::string, std::vector<double>>& columns() { return columns_; }
    const std::map<std::string, std::vector<double>>& columns() const { return columns_; }
    const std::vector<double>* find(const std::string& weight) const;

    std::uint64_t tokens() const { return tokens_; }
    void add_tokens(std::uint64_t n) { tokens_ += n; }

    // Add the squared rows of input [rows, cols] to the entry for weight.
    void accumulate(const std::string& weight, const Tensor& input);
    void merge(const ImportanceMatrix& other);

    std::string serialize() const;
    static ImportanceMatrix deserialize(const std::string& bytes);  // throws FormatError
    void save(const std::filesystem::path& path) const;
    static ImportanceMatrix load(const std::filesystem::path& path);

    friend bool operator==(const ImportanceMatrix&, const ImportanceMatrix&) = default;

private:
    std::map<std::string, std::vector<double>> columns_;
    std::uint64_t tokens_ = 0;
};

inline constexpr std::uint32_t kImatrixFormatVersion = 1;

// Runs the model over the stream in context-length chunks and accumulates the
// inputs of every linear weight. Throws DataError on an empty stream.
ImportanceMatrix accumulate_imatrix(const model::TinyModel& model, std::span<const nn::TokenId> stream);

}  // namespace wlab::quant
