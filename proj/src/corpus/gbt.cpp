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

#include "wlab/corpus/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "wlab/binio.hpp"
#include "wlab/error.hpp"
#include "wlab/io.hpp"
#include "wlab/rng.hpp"

namespace wlab::corpus {

namespace {

constexpr char kMagic[] = "WGBT";
constexpr double kMinGain = 1e-12;

std::vector<double> softmax_scores(const std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double s = 0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        p[k] = std::exp(z[k] - m);
        s += p[k];
    }
    for (auto& v : p) v /= s;
    return p;
}

struct Split {
    int feature = -1;
    double threshold = 0;
    double gain = kMinGain;
};

class TreeBuilder {
public:
    TreeBuilder(const std::vector<const float*>& rows, const std::vector<std::vector<std::uint32_t>>& sorted,
                const std::vector<double>& grad, const std::vector<double>& hess, const GbtConfig& cfg)
        : rows_(rows), sorted_(sorted), g_(grad), h_(hess), cfg_(cfg), node_of_(rows.size(), -1) {}

    Tree build(int cls, const std::vector<std::uint32_t>& members) {
        tree_ = Tree{cls, {}};
        grow(members, 0);
        return std::move(tree_);
    }

private:
    double leaf_value(double G, double H) const { return -G / (H + cfg_.lambda) * cfg_.learning_rate; }

    std::int32_t grow(const std::vector<std::uint32_t>& members, std::size_t depth) {
        const auto id = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        double G = 0, H = 0;
        for (auto i : members) {
            G += g_[i];
            H += h_[i];
        }
        Split best;
        if (depth < cfg_.max_depth && members.size() >= 2) best = find_split(members, id, G, H);
        if (best.feature < 0) {
            tree_.nodes[id].value = leaf_value(G, H);
            return id;
        }
        std::vector<std::uint32_t> left, right;
        for (auto i : members) {
            (rows_[i][best.feature] < best.threshold ? left : right).push_back(i);
        }
        const auto l = grow(left, depth + 1);
        const auto r = grow(right, depth + 1);
        auto& node = tree_.nodes[id];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    Split find_split(const std::vector<std::uint32_t>& members, std::int32_t id, double G, double H) {
        for (auto i : members) node_of_[i] = id;
        const double parent = G * G / (H + cfg_.lambda);
        Split best;
        std::vector<std::uint32_t> ordered;
        ordered.reserve(members.size());
        for (std::size_t f = 0; f < sorted_.size(); ++f) {
            ordered.clear();
            for (auto i : sorted_[f]) {
                if (node_of_[i] == id) ordered.push_back(i);
            }
            double GL = 0, HL = 0;
            for (std::size_t k = 0; k + 1 < ordered.size(); ++k) {
                const auto i = ordered[k];
                GL += g_[i];
                HL += h_[i];
                const float a = rows_[i][f];
                const float b = rows_[ordered[k + 1]][f];
                if (!(a < b)) continue;
                const double HR = H - HL;
                if (HL < cfg_.min_child_hessian || HR < cfg_.min_child_hessian) continue;
                const double GR = G - GL;
                const double gain = GL * GL / (HL + cfg_.lambda) + GR * GR / (HR + cfg_.lambda) - parent;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = static_cast<int>(f);
                    best.threshold = (static_cast<double>(a) + static_cast<double>(b)) / 2.0;
                }
            }
        }
        for (auto i : members) node_of_[i] = -1;
        return best;
    }

    const std::vector<const float*>& rows_;
    const std::vector<std::vector<std::uint32_t>>& sorted_;
    const std::vector<double>& g_;
    const std::vector<double>& h_;
    const GbtConfig& cfg_;
    std::vector<std::int32_t> node_of_;
    Tree tree_;
};

}  // namespace

std::string quality_class_name(int cls) {
    switch (cls) {
        case 0: return "high";
        case 1: return "medium";
        case 2: return "low";
        default: return "class" + std::to_string(cls);
    }
}

int parse_quality_class(const std::string& label) {
    if (label == "high" || label == "HIGH") return 0;
    if (label == "medium" || label == "MEDIUM") return 1;
    if (label == "low" || label == "LOW") return 2;
    throw DataError("unknown quality label '" + label + "' (expected high, medium or low)");
}

void GbtConfig::validate() const {
    if (rounds == 0) throw ConfigError("gbt: rounds must be positive");
    if (max_depth == 0 || max_depth > 16) throw ConfigError("gbt: max_depth must be in [1, 16]");
    if (!(learning_rate > 0)) throw ConfigError("gbt: learning_rate must be positive");
    if (!(lambda >= 0)) throw ConfigError("gbt: lambda must be non-negative");
    if (!(subsample > 0 && subsample <= 1)) throw ConfigError("gbt: subsample must be in (0, 1]");
}

double Tree::predict(const float* x) const {
    std::int32_t i = 0;
    while (nodes[i].feature >= 0) i = x[nodes[i].feature] < nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].value;
}

std::vector<double> GbtModel::raw_scores(const std::vector<float>& x) const {
    if (static_cast<std::int32_t>(x.size()) != num_features) {
        throw ShapeError("gbt: feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                         std::to_string(num_features));
    }
    std::vector<double> z(num_classes, 0.0);
    for (const auto& t : trees) z[t.cls] += t.predict(x.data());
    return z;
}

std::vector<double> GbtModel::predict_proba(const std::vector<float>& x) const { return softmax_scores(raw_scores(x)); }

int GbtModel::predict(const std::vector<float>& x) const {
    const auto p = predict_proba(x);
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

GbtModel gbt_train(const std::vector<LabeledSample>& samples, const GbtConfig& cfg, int num_classes) {
    cfg.validate();
    if (samples.empty()) throw DataError("gbt_train: no samples");
    if (num_classes < 2) throw ConfigError("gbt_train: need at least two classes");
    const std::size_t d = samples.front().features.size();
    std::vector<std::size_t> class_counts(num_classes, 0);
    for (const auto& s : samples) {
        if (s.features.size() != d) throw DataError("gbt_train: inconsistent feature vector lengths");
        if (s.label < 0 || s.label >= num_classes) throw DataError("gbt_train: label out of range");
        for (float v : s.features) {
            if (!std::isfinite(v)) throw DataError("gbt_train: non-finite feature value");
        }
        ++class_counts[s.label];
    }
    if (std::count_if(class_counts.begin(), class_counts.end(), [](std::size_t c) { return c > 0; }) < 2) {
        throw DataError("gbt_train: training data contains a single class");
    }

    // Canonical sample order: by label, then lexicographically by features.
    std::vector<std::uint32_t> canon(samples.size());
    std::iota(canon.begin(), canon.end(), 0u);
    std::stable_sort(canon.begin(), canon.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (samples[a].label != samples[b].label) return samples[a].label < samples[b].label;
        return samples[a].features < samples[b].features;
    });
    const std::size_t n = samples.size();
    std::vector<const float*> rows(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i] = samples[canon[i]].features.data();
        labels[i] = samples[canon[i]].label;
    }
    std::vector<std::vector<std::uint32_t>> sorted(d, std::vector<std::uint32_t>(n));
    for (std::size_t f = 0; f < d; ++f) {
        std::iota(sorted[f].begin(), sorted[f].end(), 0u);
        std::stable_sort(sorted[f].begin(), sorted[f].end(),
                         [&](std::uint32_t a, std::uint32_t b) { return rows[a][f] < rows[b][f]; });
    }

    GbtModel model;
    model.num_classes = num_classes;
    model.num_features = static_cast<std::int32_t>(d);
    std::vector<std::vector<double>> scores(n, std::vector<double>(num_classes, 0.0));
    std::vector<double> grad(n), hess(n);
    Rng rng(derive_seed(cfg.seed, "gbt-subsample"));
    std::vector<std::uint32_t> members;

    for (std::size_t round = 0; round < cfg.rounds; ++round) {
        members.clear();
        for (std::uint32_t i = 0; i < n; ++i) {
            if (cfg.subsample >= 1.0 || rng.uniform() < cfg.subsample) members.push_back(i);
        }
        if (members.empty()) members.push_back(static_cast<std::uint32_t>(rng.below(n)));
        std::vector<std::vector<double>> probs(n);
        for (std::size_t i = 0; i < n; ++i) probs[i] = softmax_scores(scores[i]);
        std::vector<Tree> round_trees;
        for (int k = 0; k < num_classes; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = probs[i][k];
                grad[i] = p - (labels[i] == k ? 1.0 : 0.0);
                hess[i] = std::max(p * (1.0 - p), 1e-16);
            }
            TreeBuilder builder(rows, sorted, grad, hess, cfg);
            round_trees.push_back(builder.build(k, members));
        }
        for (auto& t : round_trees) {
            for (std::size_t i = 0; i < n; ++i) scores[i][t.cls] += t.predict(rows[i]);
            model.trees.push_back(std::move(t));
        }
    }
    return model;
}

std::string GbtModel::serialize() const {
    std::string out(kMagic, 4);
    binio::put<std::uint32_t>(out, kGbtFormatVersion);
    binio::put<std::int32_t>(out, num_classes);
    binio::put<std::int32_t>(out, num_features);
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(feature_names.size()));
    for (const auto& name : feature_names) binio::put_string(out, name);
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(trees.size()));
    for (const auto& t : trees) {
        binio::put<std::int32_t>(out, t.cls);
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(t.nodes.size()));
        for (const auto& node : t.nodes) {
            binio::put<std::int32_t>(out, node.feature);
            binio::put<double>(out, node.threshold);
            binio::put<std::int32_t>(out, node.left);
            binio::put<std::int32_t>(out, node.right);
            binio::put<double>(out, node.value);
        }
    }
    return out;
}

GbtModel GbtModel::deserialize(const std::string& bytes) {
    binio::Reader r(bytes, "classifier model");
    r.expect_magic(std::string_view(kMagic, 4));
    const auto version = r.get<std::uint32_t>("version");
    if (version != kGbtFormatVersion) {
        r.fail("unsupported format version " + std::to_string(version) + " (expected " +
               std::to_string(kGbtFormatVersion) + ")");
    }
    GbtModel m;
    m.num_classes = r.get<std::int32_t>("class count");
    m.num_features = r.get<std::int32_t>("feature count");
    if (m.num_classes < 2 || m.num_classes > 1024 || m.num_features < 0) r.fail("implausible header");
    const auto n_names = r.get<std::uint32_t>("feature name count");
    if (n_names != 0 && n_names != static_cast<std::uint32_t>(m.num_features)) r.fail("feature name count mismatch");
    for (std::uint32_t i = 0; i < n_names; ++i) m.feature_names.push_back(r.string("feature name"));
    const auto n_trees = r.get<std::uint32_t>("tree count");
    for (std::uint32_t t = 0; t < n_trees; ++t) {
        Tree tree;
        tree.cls = r.get<std::int32_t>("tree class");
        if (tree.cls < 0 || tree.cls >= m.num_classes) r.fail("tree class out of range");
        const auto n_nodes = r.get<std::uint32_t>("node count");
        if (n_nodes == 0 || n_nodes > r.remaining() / 28) r.fail("implausible node count");
        tree.nodes.resize(n_nodes);
        for (std::uint32_t i = 0; i < n_nodes; ++i) {
            auto& node = tree.nodes[i];
            node.feature = r.get<std::int32_t>("node feature");
            node.threshold = r.get<double>("node threshold");
            node.left = r.get<std::int32_t>("node left");
            node.right = r.get<std::int32_t>("node right");
            node.value = r.get<double>("node value");
            if (node.feature >= m.num_features) r.fail("node feature out of range");
            if (node.feature >= 0) {
                const auto ok = [&](std::int32_t c) { return c > static_cast<std::int32_t>(i) && c < static_cast<std::int32_t>(n_nodes); };
                if (!ok(node.left) || !ok(node.right)) r.fail("node child index out of range");
            }
        }
        m.trees.push_back(std::move(tree));
    }
    if (!r.done()) r.fail("trailing bytes");
    return m;
}

void GbtModel::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

GbtModel GbtModel::load(const std::filesystem::path& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const DataError&) {
        throw FormatError("cannot open classifier model '" + path.string() + "'");
    }
    return deserialize(bytes);
}

ValidationReport validation_report(const std::vector<int>& truth, const std::vector<int>& predicted, int num_classes) {
    if (truth.size() != predicted.size()) throw ShapeError("validation_report: length mismatch");
    ValidationReport rep;
    const auto K = static_cast<std::size_t>(num_classes);
    rep.confusion.assign(K, std::vector<std::size_t>(K, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= num_classes || predicted[i] < 0 || predicted[i] >= num_classes) {
            throw DataError("validation_report: class index out of range");
        }
        ++rep.confusion[truth[i]][predicted[i]];
        if (truth[i] == predicted[i]) ++correct;
    }
    rep.precision.resize(K);
    rep.recall.resize(K);
    rep.f1.resize(K);
    for (std::size_t c = 0; c < K; ++c) {
        double tp = static_cast<double>(rep.confusion[c][c]);
        double pred = 0, actual = 0;
        for (std::size_t o = 0; o < K; ++o) {
            pred += static_cast<double>(rep.confusion[o][c]);
            actual += static_cast<double>(rep.confusion[c][o]);
        }
        rep.precision[c] = pred > 0 ? tp / pred : 0.0;
        rep.recall[c] = actual > 0 ? tp / actual : 0.0;
        const double pr = rep.precision[c] + rep.recall[c];
        rep.f1[c] = pr > 0 ? 2 * rep.precision[c] * rep.recall[c] / pr : 0.0;
        rep.macro_precision += rep.precision[c] / static_cast<double>(K);
        rep.macro_recall += rep.recall[c] / static_cast<double>(K);
        rep.macro_f1 += rep.f1[c] / static_cast<double>(K);
    }
    rep.accuracy = truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
    return rep;
}

ValidationReport gbt_validate(const GbtModel& model, const std::vector<LabeledSample>& holdout) {
    if (holdout.empty()) throw DataError("gbt_validate: empty holdout");
    std::vector<int> truth, pred;
    for (const auto& s : holdout) {
        truth.push_back(s.label);
        pred.push_back(model.predict(s.features));
    }
    return validation_report(truth, pred, model.num_classes);
}

std::string ValidationReport::to_json() const {
    nlohmann::json j;
    j["precision"] = macro_precision;
    j["recall"] = macro_recall;
    j["f1"] = macro_f1;
    j["accuracy"] = accuracy;
    j["per_class"] = nlohmann::json::array();
    for (std::size_t c = 0; c < precision.size(); ++c) {
        j["per_class"].push_back({{"class", quality_class_name(static_cast<int>(c))},
                                  {"precision", precision[c]},
                                  {"recall", recall[c]},
                                  {"f1", f1[c]}});
    }
    j["confusion"] = confusion;
    return j.dump(2) + "\n";
}

GateDecision gate(double p_high, double threshold) {
    return p_high > threshold ? GateDecision::Kept : GateDecision::Excluded;
}

std::vector<LabeledSample> make_cluster_benchmark(std::size_t n, std::size_t dims, std::uint64_t seed) {
    Rng centers_rng(derive_seed(seed, "cluster-centers"));
    std::vector<std::vector<double>> centers(kNumQualityClasses, std::vector<double>(dims));
    for (auto& c : centers) {
        for (auto& v : c) v = centers_rng.normal(0.0, 2.5);
    }
    Rng rng(derive_seed(seed, "cluster-samples"));
    std::vector<LabeledSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = out[i];
        s.label = static_cast<int>(i % kNumQualityClasses);
        s.features.resize(dims);
        for (std::size_t k = 0; k < dims; ++k) {
            s.features[k] = static_cast<float>(centers[s.label][k] + rng.normal());
        }
    }
    rng.shuffle(out);
    return out;
}

}  // namespace wlab::corpus
