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

#include "wlab/model/model.hpp"

#include <cmath>

#include "wlab/error.hpp"
#include "wlab/rng.hpp"

namespace wlab::model {

namespace {

std::string layer_name(std::size_t i, const char* suffix) { return "layers." + std::to_string(i) + "." + suffix; }

template <typename P, typename F>
void visit_impl(P& p, F&& fn) {
    fn(std::string("tok_embeddings"), p.embedding);
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        auto& l = p.layers[i];
        fn(layer_name(i, "attention_norm"), l.attn_norm);
        fn(layer_name(i, "attention.wq"), l.wq);
        fn(layer_name(i, "attention.wk"), l.wk);
        fn(layer_name(i, "attention.wv"), l.wv);
        fn(layer_name(i, "attention.wo"), l.wo);
        fn(layer_name(i, "ffn_norm"), l.ffn_norm);
        fn(layer_name(i, "feed_forward.w_gate"), l.w_gate);
        fn(layer_name(i, "feed_forward.w_up"), l.w_up);
        fn(layer_name(i, "feed_forward.w_down"), l.w_down);
    }
    fn(std::string("norm"), p.final_norm);
    fn(std::string("output"), p.lm_head);
}

}  // namespace

bool is_norm_parameter(std::string_view name) {
    return name == "norm" || name.ends_with("attention_norm") || name.ends_with("ffn_norm");
}

Parameters Parameters::zeros(const ModelConfig& cfg) {
    const std::size_t d = cfg.model_dim, qd = cfg.n_heads * cfg.head_dim, kvd = cfg.n_kv_heads * cfg.head_dim;
    const std::size_t ff = cfg.intermediate_size, v = cfg.vocab_size;
    Parameters p;
    p.embedding = Tensor({v, d});
    p.layers.resize(cfg.n_layers);
    for (auto& l : p.layers) {
        l.attn_norm = Tensor({d});
        l.wq = Tensor({qd, d});
        l.wk = Tensor({kvd, d});
        l.wv = Tensor({kvd, d});
        l.wo = Tensor({d, qd});
        l.ffn_norm = Tensor({d});
        l.w_gate = Tensor({ff, d});
        l.w_up = Tensor({ff, d});
        l.w_down = Tensor({d, ff});
    }
    p.final_norm = Tensor({d});
    p.lm_head = Tensor({v, d});
    return p;
}

void Parameters::visit(const std::function<void(const std::string&, Tensor&)>& fn) { visit_impl(*this, fn); }

void Parameters::visit(const std::function<void(const std::string&, const Tensor&)>& fn) const {
    visit_impl(*this, fn);
}

Tensor* Parameters::find(std::string_view name) {
    Tensor* found = nullptr;
    visit([&](const std::string& n, Tensor& t) {
        if (n == name) found = &t;
    });
    return found;
}

const Tensor* Parameters::find(std::string_view name) const { return const_cast<Parameters*>(this)->find(name); }

std::uint64_t Parameters::count() const {
    std::uint64_t n = 0;
    visit([&](const std::string&, const Tensor& t) { n += t.numel(); });
    return n;
}

TinyModel init_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    TinyModel m{config, Parameters::zeros(config)};
    Rng rng(derive_seed(seed, "init"));
    m.params.visit([&](const std::string& name, Tensor& t) {
        if (is_norm_parameter(name)) {
            t.fill(1.0f);
        } else {
            for (auto& x : t.storage()) x = static_cast<float>(rng.normal(0.0, 0.02));
        }
    });
    return m;
}

Tensor forward(const TinyModel& model, std::span<const TokenId> ids, ForwardCache* cache,
               const LinearObserver& observer) {
    const auto& cfg = model.config;
    const auto& p = model.params;
    if (ids.size() > cfg.context_length) {
        throw ShapeError("forward: sequence length " + std::to_string(ids.size()) + " exceeds context length " +
                         std::to_string(cfg.context_length));
    }
    if (cache) {
        cache->ids.assign(ids.begin(), ids.end());
        cache->layers.assign(cfg.n_layers, LayerCache{});
    }
    if (ids.empty()) return Tensor({0, cfg.vocab_size});

    const auto att = cfg.attention();
    const auto positions = nn::iota_positions(ids.size());
    auto observe = [&](std::size_t layer, const char* suffix, const Tensor& in) {
        if (observer) observer(layer_name(layer, suffix), in);
    };

    Tensor x = nn::embedding(p.embedding, ids);
    for (std::size_t li = 0; li < cfg.n_layers; ++li) {
        const auto& l = p.layers[li];
        Tensor h = nn::rmsnorm(x, l.attn_norm, cfg.norm_eps);
        observe(li, "attention.wq", h);
        observe(li, "attention.wk", h);
        observe(li, "attention.wv", h);
        Tensor q = nn::rope_apply(nn::linear(h, l.wq), positions, cfg.rope_theta, cfg.head_dim);
        Tensor k = nn::rope_apply(nn::linear(h, l.wk), positions, cfg.rope_theta, cfg.head_dim);
        Tensor v = nn::linear(h, l.wv);
        auto att_res = nn::attention(q, k, v, att, true);
        observe(li, "attention.wo", att_res.out);
        Tensor x_mid = x;
        {
            Tensor o = nn::linear(att_res.out, l.wo);
            for (std::size_t i = 0; i < x_mid.numel(); ++i) x_mid[i] += o[i];
        }
        Tensor h2 = nn::rmsnorm(x_mid, l.ffn_norm, cfg.norm_eps);
        observe(li, "feed_forward.w_gate", h2);
        observe(li, "feed_forward.w_up", h2);
        nn::SwigluCache ffc;
        Tensor f = nn::swiglu(h2, l.w_gate, l.w_up, l.w_down, &ffc);
        observe(li, "feed_forward.w_down", ffc.act);
        Tensor x_out = x_mid;
        for (std::size_t i = 0; i < x_out.numel(); ++i) x_out[i] += f[i];

        if (cache) {
            auto& c = cache->layers[li];
            c.x_in = std::move(x);
            c.h_attn = std::move(h);
            c.q = std::move(q);
            c.k = std::move(k);
            c.v = std::move(v);
            c.attn_weights = std::move(att_res.weights);
            c.attn_out = std::move(att_res.out);
            c.x_mid = std::move(x_mid);
            c.h_ffn = std::move(h2);
            c.ffn = std::move(ffc);
        }
        x = std::move(x_out);
    }
    Tensor hf = nn::rmsnorm(x, p.final_norm, cfg.norm_eps);
    if (observer) observer("output", hf);
    Tensor logits = nn::linear(hf, p.lm_head);
    if (cache) {
        cache->x_final = std::move(x);
        cache->h_final = std::move(hf);
    }
    return logits;
}

void backward(const TinyModel& model, const ForwardCache& cache, const Tensor& dlogits, Parameters& grads) {
    const auto& cfg = model.config;
    const auto& p = model.params;
    const std::size_t seq = cache.ids.size();
    if (seq == 0) return;
    if (cache.layers.size() != cfg.n_layers || cache.h_final.empty()) {
        throw Error("backward: no recorded forward pass for this model");
    }
    if (dlogits.shape() != Shape{seq, cfg.vocab_size}) {
        throw ShapeError("backward: dlogits shape " + shape_to_string(dlogits.shape()) + " does not match forward");
    }
    const auto att = cfg.attention();
    const auto positions = nn::iota_positions(seq);

    Tensor dh(cache.h_final.shape());
    nn::linear_backward(cache.h_final, p.lm_head, dlogits, &dh, &grads.lm_head);
    Tensor dx(cache.x_final.shape());
    nn::rmsnorm_backward(cache.x_final, p.final_norm, cfg.norm_eps, dh, dx, grads.final_norm);

    for (std::size_t li = cfg.n_layers; li-- > 0;) {
        const auto& l = p.layers[li];
        const auto& c = cache.layers[li];
        auto& g = grads.layers[li];

        // Feed-forward residual branch.
        Tensor dx_mid = dx;
        Tensor dh2(c.h_ffn.shape());
        nn::swiglu_backward(c.h_ffn, l.w_gate, l.w_up, l.w_down, c.ffn, dx,
                            nn::SwigluGrads{&dh2, &g.w_gate, &g.w_up, &g.w_down});
        nn::rmsnorm_backward(c.x_mid, l.ffn_norm, cfg.norm_eps, dh2, dx_mid, g.ffn_norm);

        // Attention residual branch.
        Tensor datt(c.attn_out.shape());
        nn::linear_backward(c.attn_out, l.wo, dx_mid, &datt, &g.wo);
        Tensor dq(c.q.shape()), dk(c.k.shape()), dv(c.v.shape());
        nn::attention_backward(c.q, c.k, c.v, att, c.attn_weights, datt, dq, dk, dv);
        Tensor dq_pre(dq.shape()), dk_pre(dk.shape());
        nn::rope_backward(dq, positions, cfg.rope_theta, cfg.head_dim, dq_pre);
        nn::rope_backward(dk, positions, cfg.rope_theta, cfg.head_dim, dk_pre);
        Tensor dh1(c.h_attn.shape());
        nn::linear_backward(c.h_attn, l.wq, dq_pre, &dh1, &g.wq);
        nn::linear_backward(c.h_attn, l.wk, dk_pre, &dh1, &g.wk);
        nn::linear_backward(c.h_attn, l.wv, dv, &dh1, &g.wv);
        dx = std::move(dx_mid);
        nn::rmsnorm_backward(c.x_in, l.attn_norm, cfg.norm_eps, dh1, dx, g.attn_norm);
    }
    nn::embedding_backward(cache.ids, dx, grads.embedding);
}

}  // namespace wlab::model
