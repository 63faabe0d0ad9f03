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

#include "wlab/quant/quantize.hpp"

#include <algorithm>
#include <cmath>

#include "wlab/error.hpp"
#include "wlab/parallel.hpp"
#include "wlab/quant/imatrix.hpp"
#include "wlab/simd/kernels.hpp"

namespace wlab::quant {

namespace {

constexpr double kLowMultiplier = 0.5;
constexpr double kHighMultiplier = 1.2;
constexpr int kGridPoints = 48;
constexpr double kGoldenTolerance = 1e-6;  // relative to the bracket width

void check_bits(int bits) {
    if (bits < 2 || bits > 8) throw ConfigError("quantization bits must be in [2, 8], got " + std::to_string(bits));
}

float block_error(std::span<const float> v, const float* imp, float scale, float qmax) {
    return simd::kernels().quant_sq_error(v.data(), imp, v.size(), scale, 1.0f / scale, qmax);
}

float search_scale(std::span<const float> v, std::span<const float> importance, float base, float qmax) {
    // Normalizing by the largest weight makes the search blind to a constant rescaling.
    const float wmax = *std::max_element(importance.begin(), importance.end());
    std::vector<float> imp(importance.begin(), importance.end());
    for (auto& w : imp) w /= wmax;
    auto f = [&](double m) { return block_error(v, imp.data(), static_cast<float>(m * base), qmax); };
    const double step = (kHighMultiplier - kLowMultiplier) / (kGridPoints - 1);
    int best_i = 0;
    float best_e = f(kLowMultiplier);
    for (int i = 1; i < kGridPoints; ++i) {
        const float e = f(kLowMultiplier + step * i);
        if (e < best_e) {
            best_e = e;
            best_i = i;
        }
    }
    double best_m = kLowMultiplier + step * best_i;

    // Golden-section refinement inside the neighbouring grid cells.
    double lo = std::max(kLowMultiplier, best_m - step);
    double hi = std::min(kHighMultiplier, best_m + step);
    const double tol = kGoldenTolerance * (kHighMultiplier - kLowMultiplier);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    float fc = f(c), fd = f(d);
    while (hi - lo > tol) {
        if (fc <= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    for (double m : {c, d}) {
        const float e = f(m);
        if (e < best_e) {
            best_e = e;
            best_m = m;
        }
    }
    // Never worse than the plain max-abs scale.
    if (f(1.0) <= best_e) best_m = 1.0;
    return static_cast<float>(best_m * base);
}

}  // namespace

void QuantScheme::validate() const {
    check_bits(bits);
    if (block_size == 0) throw ConfigError("quantization block size must be positive");
}

QuantizedBlock quantize_block(std::span<const float> values, int bits, std::span<const float> importance) {
    check_bits(bits);
    if (values.empty()) throw ShapeError("quantize_block: empty block");
    if (!importance.empty() && importance.size() != values.size()) {
        throw ShapeError("quantize_block: importance has " + std::to_string(importance.size()) + " entries for " +
                         std::to_string(values.size()) + " values");
    }
    const float qmax = static_cast<float>((1 << (bits - 1)) - 1);
    QuantizedBlock out;
    out.codes.assign(values.size(), 0);
    const float amax = simd::kernels().max_abs(values.data(), values.size());
    const bool finite = std::all_of(values.begin(), values.end(), [](float x) { return std::isfinite(x); });
    if (!finite) throw NumericError("quantize_block: non-finite value in block");
    if (amax == 0.0f) return out;
    float scale = amax / qmax;
    if (!importance.empty()) {
        const bool any_positive = std::any_of(importance.begin(), importance.end(), [](float w) { return w > 0; });
        if (any_positive) scale = search_scale(values, importance, scale, qmax);
    }
    out.scale = scale;
    const float inv = 1.0f / scale;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.codes[i] = static_cast<std::int8_t>(std::clamp(std::nearbyint(values[i] * inv), -qmax, qmax));
    }
    return out;
}

void dequantize_block(const QuantizedBlock& block, std::span<float> out) {
    if (out.size() != block.codes.size()) throw ShapeError("dequantize_block: size mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = block.scale * static_cast<float>(block.codes[i]);
}

double weighted_quant_error(std::span<const float> values, std::span<const float> importance, float scale, int bits) {
    check_bits(bits);
    const double qmax = (1 << (bits - 1)) - 1;
    double s = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double q = 0;
        if (scale != 0.0f) q = std::clamp(static_cast<double>(std::nearbyint(values[i] * (1.0f / scale))), -qmax, qmax);
        const double e = values[i] - static_cast<double>(scale) * q;
        s += (importance.empty() ? 1.0 : importance[i]) * e * e;
    }
    return s;
}

std::uint64_t quantized_tensor_bytes(std::size_t rows, std::size_t cols, const QuantScheme& scheme) {
    scheme.validate();
    std::uint64_t bits = 0;
    for (std::size_t c = 0; c < cols; c += scheme.block_size) {
        const std::size_t len = std::min(scheme.block_size, cols - c);
        bits += static_cast<std::uint64_t>(scheme.bits) * len + 32;
    }
    bits *= rows;
    return (bits + 7) / 8;
}

std::uint64_t size_estimate(const model::ModelConfig& config, const QuantScheme& scheme) {
    const auto params = model::Parameters::zeros(config);
    std::uint64_t bytes = 0;
    params.visit([&](const std::string& name, const Tensor& t) {
        if (model::is_norm_parameter(name)) {
            bytes += 4 * t.numel();
        } else {
            bytes += quantized_tensor_bytes(t.rows(), t.last_dim(), scheme);
        }
    });
    return bytes;
}

QuantizedModel quantize_model(const model::TinyModel& model, const QuantScheme& scheme, const ImportanceMatrix* imatrix,
                              std::size_t jobs) {
    scheme.validate();
    QuantizedModel out{model, size_estimate(model.config, scheme)};
    std::vector<std::pair<std::string, Tensor*>> targets;
    out.model.params.visit([&](const std::string& name, Tensor& t) {
        if (!model::is_norm_parameter(name)) targets.emplace_back(name, &t);
    });
    // Validate importance shapes up front so no partial work is done.
    std::vector<std::vector<float>> importance(targets.size());
    if (scheme.imatrix_enabled && imatrix) {
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const auto* cols = imatrix->find(targets[i].first);
            if (!cols) continue;
            if (cols->size() != targets[i].second->last_dim()) {
                throw ShapeError("importance matrix entry '" + targets[i].first + "' has " + std::to_string(cols->size()) +
                                 " columns, weight has " + std::to_string(targets[i].second->last_dim()));
            }
            importance[i].assign(cols->begin(), cols->end());
        }
    }
    parallel_for(targets.size(), jobs, [&](std::size_t i) {
        Tensor& t = *targets[i].second;
        const std::size_t cols = t.last_dim();
        for (std::size_t r = 0; r < t.rows(); ++r) {
            float* row = t.data().data() + r * cols;
            for (std::size_t c = 0; c < cols; c += scheme.block_size) {
                const std::size_t len = std::min(scheme.block_size, cols - c);
                std::span<const float> imp;
                if (!importance[i].empty()) imp = std::span<const float>(importance[i].data() + c, len);
                const auto block = quantize_block(std::span<const float>(row + c, len), scheme.bits, imp);
                dequantize_block(block, std::span<float>(row + c, len));
            }
        }
    });
    return out;
}

}  // namespace wlab::quant
