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

#include "wlab/model/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>

#include "wlab/binio.hpp"
#include "wlab/error.hpp"
#include "wlab/io.hpp"

namespace wlab::model {

namespace {

constexpr char kMagic[4] = {'W', 'L', 'A', 'B'};

using binio::put;

std::vector<std::pair<std::string, std::int64_t>> config_fields(const ModelConfig& c) {
    return {
        {"n_layers", static_cast<std::int64_t>(c.n_layers)},
        {"model_dim", static_cast<std::int64_t>(c.model_dim)},
        {"n_heads", static_cast<std::int64_t>(c.n_heads)},
        {"n_kv_heads", static_cast<std::int64_t>(c.n_kv_heads)},
        {"head_dim", static_cast<std::int64_t>(c.head_dim)},
        {"intermediate_size", static_cast<std::int64_t>(c.intermediate_size)},
        {"vocab_size", static_cast<std::int64_t>(c.vocab_size)},
        {"context_length", static_cast<std::int64_t>(c.context_length)},
        {"sliding_window", static_cast<std::int64_t>(c.sliding_window)},
        {"rope_theta_f32bits", static_cast<std::int64_t>(std::bit_cast<std::uint32_t>(c.rope_theta))},
        {"norm_eps_f32bits", static_cast<std::int64_t>(std::bit_cast<std::uint32_t>(c.norm_eps))},
    };
}

ModelConfig config_from_fields(const std::map<std::string, std::int64_t>& f) {
    auto get = [&](const char* name) -> std::int64_t {
        auto it = f.find(name);
        if (it == f.end()) throw FormatError(std::string("checkpoint: config field '") + name + "' missing");
        if (it->second < 0) throw FormatError(std::string("checkpoint: config field '") + name + "' is negative");
        return it->second;
    };
    ModelConfig c;
    c.n_layers = static_cast<std::size_t>(get("n_layers"));
    c.model_dim = static_cast<std::size_t>(get("model_dim"));
    c.n_heads = static_cast<std::size_t>(get("n_heads"));
    c.n_kv_heads = static_cast<std::size_t>(get("n_kv_heads"));
    c.head_dim = static_cast<std::size_t>(get("head_dim"));
    c.intermediate_size = static_cast<std::size_t>(get("intermediate_size"));
    c.vocab_size = static_cast<std::size_t>(get("vocab_size"));
    c.context_length = static_cast<std::size_t>(get("context_length"));
    c.sliding_window = static_cast<std::size_t>(get("sliding_window"));
    c.rope_theta = std::bit_cast<float>(static_cast<std::uint32_t>(get("rope_theta_f32bits")));
    c.norm_eps = std::bit_cast<float>(static_cast<std::uint32_t>(get("norm_eps_f32bits")));
    if (f.size() != config_fields(c).size()) throw FormatError("checkpoint: unexpected fields in config block");
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint: invalid config block: ") + e.what());
    }
    return c;
}

}  // namespace

std::string serialize_checkpoint(const TinyModel& model) {
    std::string out(kMagic, 4);
    put<std::uint32_t>(out, kCheckpointVersion);
    const auto fields = config_fields(model.config);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(fields.size()));
    for (const auto& [name, value] : fields) {
        binio::put_string(out, name);
        put<std::int64_t>(out, value);
    }
    std::uint32_t n = 0;
    model.params.visit([&](const std::string&, const Tensor&) { ++n; });
    put<std::uint32_t>(out, n);
    model.params.visit([&](const std::string& name, const Tensor& t) {
        binio::put_string(out, name);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape()) put<std::uint64_t>(out, d);
        for (float v : t.data()) put<float>(out, v);
    });
    return out;
}

TinyModel deserialize_checkpoint(std::string_view bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("checkpoint: bad magic (not a WLAB file)");
    binio::Reader r(bytes.substr(4), "checkpoint");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kCheckpointVersion) {
        throw FormatError("checkpoint: unsupported format version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
    }
    const auto n_fields = r.get<std::uint32_t>("config field count");
    if (n_fields > 64) throw FormatError("checkpoint: implausible config field count");
    std::map<std::string, std::int64_t> fields;
    for (std::uint32_t i = 0; i < n_fields; ++i) {
        auto name = r.string("config field name");
        fields[name] = r.get<std::int64_t>("config field value");
    }
    TinyModel model{config_from_fields(fields), {}};
    model.params = Parameters::zeros(model.config);

    const auto n_params = r.get<std::uint32_t>("parameter count");
    std::uint32_t expected = 0;
    model.params.visit([&](const std::string&, Tensor&) { ++expected; });
    if (n_params != expected) {
        throw FormatError("checkpoint: " + std::to_string(n_params) + " parameter records, config implies " +
                          std::to_string(expected));
    }
    for (std::uint32_t i = 0; i < n_params; ++i) {
        const auto name = r.string("parameter name");
        Tensor* t = model.params.find(name);
        if (!t) throw FormatError("checkpoint: unknown parameter '" + name + "'");
        const auto ndim = r.get<std::uint32_t>("parameter rank");
        if (ndim > 8) throw FormatError("checkpoint: implausible rank for '" + name + "'");
        Shape shape(ndim);
        for (auto& d : shape) d = static_cast<std::size_t>(r.get<std::uint64_t>("parameter dims"));
        if (shape != t->shape()) {
            throw ShapeError("checkpoint: parameter '" + name + "' has shape " + shape_to_string(shape) +
                             " but the config requires " + shape_to_string(t->shape()));
        }
        r.floats(t->data().data(), t->numel(), "payload of '" + name + "'");
    }
    if (!r.done()) throw FormatError("checkpoint: trailing bytes after last parameter");
    return model;
}

void save_checkpoint(const TinyModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_checkpoint(model));
}

TinyModel load_checkpoint(const std::filesystem::path& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const DataError&) {
        throw FormatError("cannot open checkpoint '" + path.string() + "'");
    }
    return deserialize_checkpoint(bytes);
}

}  // namespace wlab::model
