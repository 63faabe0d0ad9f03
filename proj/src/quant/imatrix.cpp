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

#include "wlab/quant/imatrix.hpp"

#include <algorithm>
#include <cmath>

#include "wlab/binio.hpp"
#include "wlab/error.hpp"
#include "wlab/io.hpp"

namespace wlab::quant {

namespace {
constexpr char kMagic[] = "WIMX";
}

const std::vector<double>* ImportanceMatrix::find(const std::string& weight) const {
    auto it = columns_.find(weight);
    return it == columns_.end() ? nullptr : &it->second;
}

void ImportanceMatrix::accumulate(const std::string& weight, const Tensor& input) {
    const std::size_t cols = input.last_dim();
    auto& acc = columns_[weight];
    if (acc.empty()) acc.assign(cols, 0.0);
    if (acc.size() != cols) {
        throw ShapeError("importance matrix: '" + weight + "' saw inputs of width " + std::to_string(cols) +
                         " after width " + std::to_string(acc.size()));
    }
    const auto data = input.data();
    for (std::size_t r = 0; r < input.rows(); ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double x = data[r * cols + c];
            acc[c] += x * x;
        }
    }
}

void ImportanceMatrix::merge(const ImportanceMatrix& other) {
    for (const auto& [name, vals] : other.columns_) {
        auto& acc = columns_[name];
        if (acc.empty()) acc.assign(vals.size(), 0.0);
        if (acc.size() != vals.size()) throw ShapeError("importance matrix: width mismatch merging '" + name + "'");
        for (std::size_t i = 0; i < vals.size(); ++i) acc[i] += vals[i];
    }
    tokens_ += other.tokens_;
}

std::string ImportanceMatrix::serialize() const {
    std::string out(kMagic, 4);
    binio::put<std::uint32_t>(out, kImatrixFormatVersion);
    binio::put<std::uint64_t>(out, tokens_);
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(columns_.size()));
    for (const auto& [name, vals] : columns_) {
        binio::put_string(out, name);
        binio::put<std::uint64_t>(out, vals.size());
        for (double v : vals) binio::put<double>(out, v);
    }
    return out;
}

ImportanceMatrix ImportanceMatrix::deserialize(const std::string& bytes) {
    binio::Reader r(bytes, "importance matrix");
    r.expect_magic(std::string_view(kMagic, 4));
    const auto version = r.get<std::uint32_t>("version");
    if (version != kImatrixFormatVersion) {
        r.fail("unsupported format version " + std::to_string(version) + " (expected " +
               std::to_string(kImatrixFormatVersion) + ")");
    }
    ImportanceMatrix m;
    m.tokens_ = r.get<std::uint64_t>("token count");
    const auto n = r.get<std::uint32_t>("entry count");
    for (std::uint32_t i = 0; i < n; ++i) {
        auto name = r.string("entry name");
        const auto len = r.get<std::uint64_t>("entry length");
        if (len > r.remaining() / sizeof(double)) r.fail("entry '" + name + "' is truncated");
        std::vector<double> vals(len);
        for (auto& v : vals) {
            v = r.get<double>("entry values");
            if (!(v >= 0) || !std::isfinite(v)) r.fail("entry '" + name + "' has a negative or non-finite value");
        }
        m.columns_.emplace(std::move(name), std::move(vals));
    }
    if (!r.done()) r.fail("trailing bytes");
    return m;
}

void ImportanceMatrix::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

ImportanceMatrix ImportanceMatrix::load(const std::filesystem::path& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const DataError&) {
        throw FormatError("cannot open importance matrix '" + path.string() + "'");
    }
    return deserialize(bytes);
}

ImportanceMatrix accumulate_imatrix(const model::TinyModel& model, std::span<const nn::TokenId> stream) {
    if (stream.empty()) throw DataError("accumulate_imatrix: empty calibration stream");
    ImportanceMatrix m;
    const std::size_t ctx = model.config.context_length;
    const model::LinearObserver observer = [&](const std::string& name, const Tensor& input) { m.accumulate(name, input); };
    for (std::size_t start = 0; start < stream.size(); start += ctx) {
        const auto chunk = stream.subspan(start, std::min(ctx, stream.size() - start));
        model::forward(model, chunk, nullptr, observer);
        m.add_tokens(chunk.size());
    }
    return m;
}

}  // namespace wlab::quant
