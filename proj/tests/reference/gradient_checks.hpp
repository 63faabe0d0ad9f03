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

// Analytic backward passes against central finite differences (h = 1e-3) of
// the double-precision reference forward. Each check builds one seeded random
// instance and returns the largest relative error over its inputs.

#include <algorithm>
#include <string>
#include <vector>

#include "reference/reference.hpp"
#include "wlab/model/model.hpp"
#include "wlab/nn/ops.hpp"
#include "wlab/rng.hpp"
#include "wlab/train/loss.hpp"

namespace gradcheck {

using wlab::Rng;
using wlab::Tensor;
namespace nn = wlab::nn;

inline constexpr double kTolerance = 1e-3;

inline std::vector<double> to_double(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

inline ref::Mat as_mat(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    ref::Mat m(rows, cols);
    m.v = v;
    return m;
}

inline double softmax(int seed) {
    Rng rng(seed);
    auto x = ref::random_tensor(rng, {3, 5}, 2.0);
    auto g = ref::random_tensor(rng, {3, 5});
    Tensor dx({3, 5});
    nn::softmax_backward(nn::softmax(x, 1), g, 1, dx);
    const auto G = ref::from_tensor(g);
    auto f = [&](const std::vector<double>& xv) {
        double s = 0;
        for (std::size_t r = 0; r < 3; ++r) {
            const auto p = ref::softmax({xv.begin() + r * 5, xv.begin() + (r + 1) * 5});
            for (std::size_t c = 0; c < 5; ++c) s += G(r, c) * p[c];
        }
        return s;
    };
    return ref::relative_error(dx.data(), ref::numeric_gradient(f, to_double(x)));
}

inline double softmax_cross_entropy(int seed) {
    Rng rng(seed);
    auto x = ref::random_tensor(rng, {7}, 2.0);
    const std::size_t target = rng.below(7);
    std::vector<float> d(7, 0.0f);
    nn::cross_entropy_row_backward(x.data(), target, 1.0, d);
    auto f = [&](const std::vector<double>& xv) { return ref::cross_entropy(xv, target); };
    return ref::relative_error(d, ref::numeric_gradient(f, to_double(x)));
}

inline double linear(int seed) {
    Rng rng(seed);
    auto x = ref::random_tensor(rng, {3, 4}), w = ref::random_tensor(rng, {5, 4}), g = ref::random_tensor(rng, {3, 5});
    Tensor dx({3, 4}), dw({5, 4});
    nn::linear_backward(x, w, g, &dx, &dw);
    const auto G = ref::from_tensor(g);
    const auto X = ref::from_tensor(x), W = ref::from_tensor(w);
    auto fx = [&](const std::vector<double>& v) { return ref::dot(G, ref::linear(as_mat(v, 3, 4), W)); };
    auto fw = [&](const std::vector<double>& v) { return ref::dot(G, ref::linear(X, as_mat(v, 5, 4))); };
    return std::max(ref::relative_error(dx.data(), ref::numeric_gradient(fx, X.v)),
                    ref::relative_error(dw.data(), ref::numeric_gradient(fw, W.v)));
}

inline double rmsnorm(int seed) {
    Rng rng(seed);
    auto x = ref::random_tensor(rng, {3, 6});
    auto gain = ref::random_tensor(rng, {6});
    auto g = ref::random_tensor(rng, {3, 6});
    Tensor dx({3, 6}), dgain({6});
    nn::rmsnorm_backward(x, gain, 1e-5f, g, dx, dgain);
    const auto G = ref::from_tensor(g);
    const auto gv = to_double(gain);
    auto fx = [&](const std::vector<double>& v) { return ref::dot(G, ref::rmsnorm(as_mat(v, 3, 6), gv, 1e-5)); };
    auto fg = [&](const std::vector<double>& v) { return ref::dot(G, ref::rmsnorm(ref::from_tensor(x), v, 1e-5)); };
    return std::max(ref::relative_error(dx.data(), ref::numeric_gradient(fx, to_double(x))),
                    ref::relative_error(dgain.data(), ref::numeric_gradient(fg, gv)));
}

inline double swiglu(int seed) {
    Rng rng(seed);
    auto x = ref::random_tensor(rng, {2, 4});
    auto wg = ref::random_tensor(rng, {6, 4}, 0.5), wu = ref::random_tensor(rng, {6, 4}, 0.5);
    auto wd = ref::random_tensor(rng, {4, 6}, 0.5), g = ref::random_tensor(rng, {2, 4});
    nn::SwigluCache cache;
    nn::swiglu(x, wg, wu, wd, &cache);
    Tensor dx({2, 4}), dg({6, 4}), du({6, 4}), dd({4, 6});
    nn::swiglu_backward(x, wg, wu, wd, cache, g, {&dx, &dg, &du, &dd});
    const auto G = ref::from_tensor(g), X = ref::from_tensor(x);
    const auto WG = ref::from_tensor(wg), WU = ref::from_tensor(wu), WD = ref::from_tensor(wd);
    auto fx = [&](const std::vector<double>& v) { return ref::dot(G, ref::swiglu(as_mat(v, 2, 4), WG, WU, WD)); };
    auto fg = [&](const std::vector<double>& v) { return ref::dot(G, ref::swiglu(X, as_mat(v, 6, 4), WU, WD)); };
    auto fu = [&](const std::vector<double>& v) { return ref::dot(G, ref::swiglu(X, WG, as_mat(v, 6, 4), WD)); };
    auto fd = [&](const std::vector<double>& v) { return ref::dot(G, ref::swiglu(X, WG, WU, as_mat(v, 4, 6))); };
    return std::max({ref::relative_error(dx.data(), ref::numeric_gradient(fx, X.v)),
                     ref::relative_error(dg.data(), ref::numeric_gradient(fg, WG.v)),
                     ref::relative_error(du.data(), ref::numeric_gradient(fu, WU.v)),
                     ref::relative_error(dd.data(), ref::numeric_gradient(fd, WD.v))});
}

inline double rope(int seed) {
    Rng rng(seed);
    auto x = ref::random_tensor(rng, {4, 8}), g = ref::random_tensor(rng, {4, 8});
    const std::vector<std::size_t> pos = {0, 3, 7, 20};
    Tensor dx({4, 8});
    nn::rope_backward(g, pos, 10000.0f, 4, dx);
    const auto G = ref::from_tensor(g);
    auto f = [&](const std::vector<double>& v) { return ref::dot(G, ref::rope(as_mat(v, 4, 8), pos, 10000.0, 4)); };
    return ref::relative_error(dx.data(), ref::numeric_gradient(f, to_double(x)));
}

// Window sizes 1..4 cycle with the seed.
inline double attention(int seed) {
    Rng rng(seed);
    const std::size_t n = 5;
    nn::AttentionConfig c{4, 2, 2, std::size_t{1 + static_cast<std::size_t>(seed % 4)}, 10000.0f};
    auto q = ref::random_tensor(rng, {n, 8}), k = ref::random_tensor(rng, {n, 4}), v = ref::random_tensor(rng, {n, 4});
    auto g = ref::random_tensor(rng, {n, 8});
    const auto res = nn::attention(q, k, v, c, true);
    Tensor dq({n, 8}), dk({n, 4}), dv({n, 4});
    nn::attention_backward(q, k, v, c, res.weights, g, dq, dk, dv);
    const auto G = ref::from_tensor(g), Q = ref::from_tensor(q), K = ref::from_tensor(k), V = ref::from_tensor(v);
    auto att = [&](const ref::Mat& a, const ref::Mat& b, const ref::Mat& cc) {
        return ref::dot(G, ref::attention(a, b, cc, 4, 2, 2, c.sliding_window, true));
    };
    auto fq = [&](const std::vector<double>& x) { return att(as_mat(x, n, 8), K, V); };
    auto fk = [&](const std::vector<double>& x) { return att(Q, as_mat(x, n, 4), V); };
    auto fv = [&](const std::vector<double>& x) { return att(Q, K, as_mat(x, n, 4)); };
    return std::max({ref::relative_error(dq.data(), ref::numeric_gradient(fq, Q.v)),
                     ref::relative_error(dk.data(), ref::numeric_gradient(fk, K.v)),
                     ref::relative_error(dv.data(), ref::numeric_gradient(fv, V.v))});
}

inline double wicel(int seed) {
    Rng rng(seed);
    const std::size_t n = 4, vocab = 6;
    auto logits = ref::random_tensor(rng, {n, vocab}, 2.0);
    std::vector<nn::TokenId> targets(n);
    std::vector<std::uint8_t> mask(n);
    for (std::size_t t = 0; t < n; ++t) {
        targets[t] = static_cast<nn::TokenId>(rng.below(vocab));
        mask[t] = t == 0 || rng.below(2) ? 1 : 0;
    }
    std::size_t count = 0;
    for (auto m : mask) count += m;
    const float w = static_cast<float>(rng.uniform(0.1, 1.0));
    Tensor d({n, vocab});
    wlab::train::wicel_loss_backward(logits, targets, mask, w, 1.0 / double(count), d);
    auto f = [&](const std::vector<double>& v) {
        std::vector<double> cw(vocab, double(w));
        return ref::weighted_ce_class_form(as_mat(v, n, vocab), targets, mask, cw) / double(count);
    };
    return ref::relative_error(d.data(), ref::numeric_gradient(f, to_double(logits)));
}

struct NamedError {
    std::string name;
    double error = 0;
};

// One entry per parameter tensor of a two-layer model.
inline std::vector<NamedError> full_model(int seed) {
    wlab::model::ModelConfig cfg;
    cfg.n_layers = 2;
    cfg.model_dim = 8;
    cfg.n_heads = 2;
    cfg.n_kv_heads = 1;
    cfg.head_dim = 4;
    cfg.intermediate_size = 12;
    cfg.vocab_size = 11;
    cfg.context_length = 8;
    cfg.sliding_window = 3;
    Rng rng(1000 + static_cast<std::uint64_t>(seed));
    auto m = wlab::model::init_model(cfg, static_cast<std::uint64_t>(seed));
    // Larger weights than the default init so every path carries signal.
    // Embedding rows get unit scale: an almost-zero row sits where the
    // norm's curvature makes a 1e-3 difference step inaccurate.
    m.params.visit([&](const std::string& name, Tensor& t) {
        const float scale = name == "tok_embeddings" ? 1.0f : 0.3f;
        for (auto& x : t.data()) {
            x = wlab::model::is_norm_parameter(name) ? 1.0f + 0.3f * float(rng.normal()) : scale * float(rng.normal());
        }
    });
    const std::size_t n = 6;
    std::vector<nn::TokenId> ids(n);
    for (auto& id : ids) id = static_cast<nn::TokenId>(rng.below(cfg.vocab_size));
    auto g = ref::random_tensor(rng, {n, cfg.vocab_size});

    wlab::model::ForwardCache cache;
    wlab::model::forward(m, ids, &cache);
    auto grads = wlab::model::Parameters::zeros(cfg);
    wlab::model::backward(m, cache, g, grads);

    ref::Model rm(m);
    const auto G = ref::from_tensor(g);
    std::vector<NamedError> out;
    std::size_t idx = 0;
    grads.visit([&](const std::string& name, const Tensor& gt) {
        const std::size_t pi = idx++;
        auto f = [&](const std::vector<double>& v) {
            ref::Model copy = rm;
            copy.params[pi].v = v;
            return ref::dot(G, ref::forward(copy, ids));
        };
        out.push_back({name, ref::relative_error(gt.data(), ref::numeric_gradient(f, rm.params[pi].v))});
    });
    return out;
}

}  // namespace gradcheck
