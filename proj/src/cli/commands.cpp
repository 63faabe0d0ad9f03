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

#include "wlab/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wlab/cli/run_config.hpp"
#include "wlab/corpus/features.hpp"
#include "wlab/corpus/gbt.hpp"
#include "wlab/corpus/pipeline.hpp"
#include "wlab/error.hpp"
#include "wlab/io.hpp"
#include "wlab/model/checkpoint.hpp"
#include "wlab/model/generate.hpp"
#include "wlab/quant/fidelity.hpp"
#include "wlab/quant/imatrix.hpp"
#include "wlab/quant/quantize.hpp"
#include "wlab/rng.hpp"
#include "wlab/tok/bpe.hpp"
#include "wlab/tok/merge.hpp"
#include "wlab/tok/metrics.hpp"
#include "wlab/train/trainer.hpp"
#include "wlab/utf8.hpp"

namespace wlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Streams {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

struct Command {
    std::string name;
    std::string help;
    Schema schema;
    std::function<void(RunConfig&, Streams&)> body;
};

// ---- shared helpers -------------------------------------------------------

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + " is required");
    if (!fs::is_regular_file(path)) throw ConfigError(what + " not found: " + path);
}

void require_set(const RunConfig& cfg, const std::string& key) {
    if (cfg.get(key).empty()) throw ConfigError("--" + key + " is required");
}

std::string read_input(const std::string& path, Streams& io, const std::string& what) {
    if (path == "-") {
        std::ostringstream ss;
        ss << io.in.rdbuf();
        return ss.str();
    }
    require_file(path, what);
    return read_file(path);
}

void write_output(const std::string& path, const std::string& contents, Streams& io) {
    if (path == "-") {
        io.out << contents;
        io.out.flush();
    } else {
        write_file_atomic(path, contents);
    }
}

// The resolved configuration lands next to the command's main output.
void write_resolved(const RunConfig& cfg, const std::string& command, const std::string& output) {
    if (output.empty() || output == "-") return;
    write_file_atomic(output + ".resolved.cfg", cfg.serialize(command));
}

std::vector<nn::TokenId> read_token_stream(const std::string& path, const std::string& format, Streams& io,
                                           const std::string& what) {
    const std::string text = read_input(path, io, what);
    if (format == "text") return train::ChatTemplate::encode_bytes(text);
    if (format != "ids") throw ConfigError("token stream format must be 'text' or 'ids', got '" + format + "'");
    std::vector<nn::TokenId> ids;
    std::istringstream ss(text);
    std::string tok;
    while (ss >> tok) {
        nn::TokenId v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) throw DataError(what + ": bad token id '" + tok + "'");
        ids.push_back(v);
    }
    return ids;
}

void check_ids(const std::vector<nn::TokenId>& ids, std::size_t vocab, const std::string& what) {
    for (auto id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
            throw DataError(what + ": token id " + std::to_string(id) + " outside the model vocabulary of " +
                            std::to_string(vocab));
        }
    }
}

model::TinyModel load_model(const std::string& path, const std::string& what) {
    require_file(path, what);
    return model::load_checkpoint(path);
}

// ---- train ----------------------------------------------------------------

struct TrainPreset {
    std::map<std::string, std::string> values;
};

const std::map<std::string, TrainPreset>& train_presets() {
    static const std::map<std::string, TrainPreset> presets = {
        {"desk",
         {{{"model", "desk"}, {"base_lr", "0.002"}, {"min_lr", "0.0002"}, {"warmup_iters", "auto"}, {"total_iters", "0"},
           {"batch_size", "8"}, {"epochs", "3"}, {"baseline_batch_tokens", "256"}, {"alr", "on"}, {"beta1", "0.9"},
           {"beta2", "0.95"}, {"weight_decay", "0.1"}, {"clip_norm", "1.0"}}}},
        {"pretrain-7b",
         {{{"model", "full-7b"}, {"base_lr", "3e-05"}, {"min_lr", "2e-05"}, {"warmup_iters", "2000"},
           {"total_iters", "17350"}, {"batch_size", "256"}, {"epochs", "2"}, {"baseline_batch_tokens", "4096"},
           {"alr", "off"}, {"beta1", "0.9"}, {"beta2", "0.95"}, {"weight_decay", "0.1"}, {"clip_norm", "1.0"}}}},
        {"sft-7b",
         {{{"model", "full-7b"}, {"base_lr", "7e-06"}, {"min_lr", "6e-07"}, {"warmup_iters", "50"},
           {"total_iters", "55440"}, {"batch_size", "128"}, {"epochs", "3"}, {"baseline_batch_tokens", "4096"},
           {"alr", "on"}, {"beta1", "0.9"}, {"beta2", "0.95"}, {"weight_decay", "0.05"}, {"clip_norm", "1.0"}}}},
    };
    return presets;
}

Schema train_schema() {
    return {
        {"preset", "desk", "hyperparameter preset: desk, pretrain-7b or sft-7b"},
        {"model", "", "model architecture: desk or full-7b (default from preset)"},
        {"data", "", "training data, JSON lines"},
        {"out", "run", "output directory"},
        {"init", "", "start from this checkpoint instead of a fresh initialization"},
        {"seed", "0", "root random seed"},
        {"epochs", "", "passes over the data"},
        {"batch_size", "", "samples per iteration"},
        {"max_iters", "0", "stop after this many iterations (0 = no limit)"},
        {"base_lr", "", "peak learning rate"},
        {"min_lr", "", "final learning rate"},
        {"warmup_iters", "", "linear warmup length, or auto (a tenth of the run)"},
        {"total_iters", "", "schedule length (0 = planned iterations)"},
        {"baseline_batch_tokens", "", "reference batch size in tokens for the adaptive rate"},
        {"alr", "", "adaptive learning rate: on or off"},
        {"beta1", "", "AdamW beta1"},
        {"beta2", "", "AdamW beta2"},
        {"eps", "1e-08", "AdamW epsilon"},
        {"weight_decay", "", "decoupled weight decay"},
        {"clip_norm", "", "global gradient norm limit (0 disables)"},
        {"decay_norm_gains", "off", "apply weight decay to norm gains too"},
        {"dry_run", "off", "resolve and write the configuration without training", true},
    };
}

void fill_preset(RunConfig& cfg) {
    const auto& presets = train_presets();
    auto it = presets.find(cfg.get("preset"));
    if (it == presets.end()) throw ConfigError("unknown preset '" + cfg.get("preset") + "' (desk, pretrain-7b, sft-7b)");
    for (const auto& [k, v] : it->second.values) {
        if (cfg.get(k).empty()) cfg.set(k, v);
    }
}

void cmd_train(RunConfig& cfg, Streams& io) {
    fill_preset(cfg);
    const fs::path out_dir = cfg.get("out");
    model::ModelConfig mcfg = model::ModelConfig::preset(cfg.get("model"));

    train::TrainConfig tc;
    tc.epochs = cfg.get_size("epochs");
    tc.batch_size = cfg.get_size("batch_size");
    tc.max_iters = cfg.get_size("max_iters");
    tc.seed = cfg.get_u64("seed");
    tc.schedule.base_lr = cfg.get_double("base_lr");
    tc.schedule.min_lr = cfg.get_double("min_lr");
    tc.schedule.baseline_batch_tokens = cfg.get_size("baseline_batch_tokens");
    tc.schedule.alr_enabled = cfg.get_bool("alr");
    tc.optimizer.beta1 = cfg.get_double("beta1");
    tc.optimizer.beta2 = cfg.get_double("beta2");
    tc.optimizer.eps = cfg.get_double("eps");
    tc.optimizer.weight_decay = cfg.get_double("weight_decay");
    tc.optimizer.clip_norm = cfg.get_double("clip_norm");
    tc.optimizer.decay_norm_gains = cfg.get_bool("decay_norm_gains");

    if (cfg.get_bool("dry_run")) {
        write_file_atomic(out_dir / "resolved.cfg", cfg.serialize("train"));
        io.out << "resolved configuration written to " << (out_dir / "resolved.cfg").string() << "\n";
        return;
    }
    if (mcfg.parameter_count() > 100'000'000) {
        throw ConfigError("model '" + cfg.get("model") +
                          "' is a configuration preset only and is too large to train here; use --model desk");
    }
    require_file(cfg.get("data"), "training data");

    model::TinyModel m = cfg.get("init").empty() ? model::init_model(mcfg, tc.seed) : load_model(cfg.get("init"), "initial checkpoint");
    if (!cfg.get("init").empty() && m.config != mcfg) {
        throw FormatError("initial checkpoint architecture does not match model '" + cfg.get("model") + "'");
    }
    const auto data = train::load_dataset(cfg.get("data"), m.config.vocab_size);
    if (data.empty()) throw DataError(cfg.get("data") + ": no training samples");

    const std::size_t planned = tc.planned_iters(data.size());
    tc.schedule.total_iters = cfg.get_size("total_iters");
    if (tc.schedule.total_iters == 0) tc.schedule.total_iters = planned;
    if (cfg.get("warmup_iters") == "auto") {
        tc.schedule.warmup_iters = tc.schedule.total_iters / 10;
    } else {
        tc.schedule.warmup_iters = cfg.get_size("warmup_iters");
    }
    // Record what "auto" and "0" resolved to, so the file alone reproduces the run.
    cfg.set("total_iters", std::to_string(tc.schedule.total_iters));
    cfg.set("warmup_iters", std::to_string(tc.schedule.warmup_iters));
    tc.validate();

    const auto report = train::train(m, data, tc);
    fs::create_directories(out_dir);
    model::save_checkpoint(m, out_dir / "model.ckpt");
    write_file_atomic(out_dir / "train.csv", report.to_csv());
    write_file_atomic(out_dir / "resolved.cfg", cfg.serialize("train"));
    if (!report.iterations.empty()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "trained %zu iterations: loss %.4f -> %.4f\n", report.iterations.size(),
                      report.iterations.front().loss, report.iterations.back().loss);
        io.out << buf;
    }
}

// ---- init / generate ------------------------------------------------------

void cmd_init(RunConfig& cfg, Streams& io) {
    require_set(cfg, "out");
    const auto mcfg = model::ModelConfig::preset(cfg.get("model"));
    if (mcfg.parameter_count() > 100'000'000) throw ConfigError("model '" + cfg.get("model") + "' is too large to materialize");
    model::save_checkpoint(model::init_model(mcfg, cfg.get_u64("seed")), cfg.get("out"));
    write_resolved(cfg, "init", cfg.get("out"));
    io.out << "wrote " << cfg.get("out") << " (" << mcfg.parameter_count() << " parameters)\n";
}

void cmd_generate(RunConfig& cfg, Streams& io) {
    const auto m = load_model(cfg.get("ckpt"), "checkpoint");
    std::vector<nn::TokenId> prompt;
    if (cfg.get_bool("chat")) {
        prompt = {train::ChatTemplate::kBos, train::ChatTemplate::kUser};
        for (auto id : train::ChatTemplate::encode_bytes(cfg.get("prompt"))) prompt.push_back(id);
        prompt.push_back(train::ChatTemplate::kAssistant);
    } else {
        prompt = train::ChatTemplate::encode_bytes(cfg.get("prompt"));
    }
    check_ids(prompt, m.config.vocab_size, "prompt");
    const auto temperature = static_cast<float>(cfg.get_double("temperature"));
    auto result = model::generate(m, prompt, cfg.get_size("max_new"), temperature, cfg.get_u64("seed"));
    // Stop at the end-of-sequence token when the model emits one.
    auto eos = std::find(result.tokens.begin(), result.tokens.end(), train::ChatTemplate::kEos);
    result.tokens.erase(eos, result.tokens.end());
    io.out << train::ChatTemplate::decode(result.tokens) << "\n";
    if (result.truncated) io.err << "note: the context window was exceeded; earliest tokens were dropped\n";
}

// ---- corpus ---------------------------------------------------------------

Schema corpus_schema(bool classify) {
    Schema s = {
        {"input", "-", "input JSON lines ('-' for stdin)"},
        {"output", "-", "output JSON lines ('-' for stdout)"},
        {"jobs", "1", "worker threads"},
        {"strict", "off", "fail on the first malformed line", true},
        {"threshold", "0.9", "keep a document when P(high) exceeds this"},
        {"kept_only", "off", "drop excluded documents from the output", true},
    };
    if (classify) {
        s.push_back({"model", "", "classifier model file"});
        s.push_back({"features", "", "feature registry file (default: built-in registry)"});
    }
    return s;
}

corpus::FeatureRegistry load_registry(const RunConfig& cfg) {
    if (cfg.get("features").empty()) return corpus::FeatureRegistry::builtin();
    require_file(cfg.get("features"), "feature registry");
    return corpus::FeatureRegistry::load(cfg.get("features"));
}

void run_corpus_stage(corpus::Stage stage, const std::string& name, RunConfig& cfg, Streams& io) {
    corpus::PipelineOptions opts;
    opts.jobs = std::max<std::size_t>(1, cfg.get_size("jobs"));
    opts.strict = cfg.get_bool("strict");
    opts.threshold = cfg.get_double("threshold");
    opts.kept_only = cfg.get_bool("kept_only");
    if (!(opts.threshold >= 0 && opts.threshold <= 1)) throw ConfigError("--threshold must be in [0, 1]");

    corpus::FeatureRegistry registry;
    corpus::GbtModel model;
    corpus::PipelineContext ctx;
    if (stage == corpus::Stage::Classify || stage == corpus::Stage::Full) {
        registry = load_registry(cfg);
        require_file(cfg.get("model"), "classifier model");
        model = corpus::GbtModel::load(cfg.get("model"));
        ctx.registry = &registry;
        ctx.model = &model;
    }

    std::unique_ptr<std::ifstream> file;
    std::istream* in = &io.in;
    if (cfg.get("input") != "-") {
        require_file(cfg.get("input"), "input");
        file = std::make_unique<std::ifstream>(cfg.get("input"), std::ios::binary);
        in = file.get();
    }
    std::ostringstream buffer;
    const auto stats = corpus::run_stage(stage, *in, buffer, ctx, opts);
    for (const auto& w : stats.warnings) io.err << "warning: " << w << "\n";
    if (stats.skipped > 0) io.err << name << ": skipped " << stats.skipped << " malformed line(s)\n";
    write_output(cfg.get("output"), buffer.str(), io);
    write_resolved(cfg, name, cfg.get("output"));
}

Schema train_classifier_schema() {
    return {
        {"data", "", "labeled JSON lines: {\"text\" or \"features\", \"label\": high|medium|low}"},
        {"out", "", "output model file"},
        {"features", "", "feature registry file (default: built-in registry)"},
        {"rounds", "60", "boosting rounds"},
        {"max_depth", "3", "tree depth"},
        {"learning_rate", "0.3", "shrinkage"},
        {"lambda", "1.0", "L2 penalty on leaf values"},
        {"subsample", "1.0", "row fraction per round"},
        {"holdout", "0.1", "fraction held out for validation"},
        {"seed", "0", "root random seed"},
    };
}

void cmd_train_classifier(RunConfig& cfg, Streams& io) {
    require_set(cfg, "out");
    const auto registry = load_registry(cfg);
    const std::string text = read_input(cfg.get("data"), io, "classifier training data");
    std::vector<corpus::LabeledSample> samples;
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = cfg.get("data") + ":" + std::to_string(line_no) + ": ";
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(where + e.what());
        }
        corpus::LabeledSample s;
        try {
            s.label = corpus::parse_quality_class(j.at("label").get<std::string>());
            if (j.contains("features")) {
                s.features = j.at("features").get<std::vector<float>>();
                if (s.features.size() != registry.size()) throw DataError("feature vector length does not match the registry");
            } else {
                s.features = registry.extract(j.at("text").get<std::string>());
            }
        } catch (const json::exception& e) {
            throw DataError(where + e.what());
        } catch (const DataError& e) {
            throw DataError(where + e.what());
        }
        samples.push_back(std::move(s));
    }
    const double holdout = cfg.get_double("holdout");
    if (!(holdout >= 0 && holdout < 1)) throw ConfigError("--holdout must be in [0, 1)");
    const std::uint64_t seed = cfg.get_u64("seed");
    Rng rng(derive_seed(seed, "holdout"));
    rng.shuffle(samples);
    const auto n_hold = static_cast<std::size_t>(std::floor(holdout * static_cast<double>(samples.size())));
    std::vector<corpus::LabeledSample> valid(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n_hold));
    std::vector<corpus::LabeledSample> train_set(samples.begin() + static_cast<std::ptrdiff_t>(n_hold), samples.end());

    corpus::GbtConfig gc;
    gc.rounds = cfg.get_size("rounds");
    gc.max_depth = cfg.get_size("max_depth");
    gc.learning_rate = cfg.get_double("learning_rate");
    gc.lambda = cfg.get_double("lambda");
    gc.subsample = cfg.get_double("subsample");
    gc.seed = derive_seed(seed, "gbt");
    auto model = corpus::gbt_train(train_set, gc);
    model.feature_names = registry.names();
    model.save(cfg.get("out"));
    if (!valid.empty()) {
        const auto rep = corpus::gbt_validate(model, valid);
        write_file_atomic(cfg.get("out") + ".validation.json", rep.to_json());
        char buf[200];
        std::snprintf(buf, sizeof buf, "validation on %zu documents: precision %.4f recall %.4f F1 %.4f\n", valid.size(),
                      rep.macro_precision, rep.macro_recall, rep.macro_f1);
        io.out << buf;
    }
    write_resolved(cfg, "train-classifier", cfg.get("out"));
}

// ---- tokenizer ------------------------------------------------------------

std::vector<std::string> read_documents(const std::string& path, const std::string& format, Streams& io) {
    const std::string text = read_input(path, io, "corpus");
    std::vector<std::string> docs;
    if (format == "whole") {
        docs.push_back(text);
        return docs;
    }
    std::istringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (format == "lines") {
            docs.push_back(line);
        } else if (format == "jsonl") {
            try {
                docs.push_back(json::parse(line).at("text").get<std::string>());
            } catch (const json::exception& e) {
                throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
            }
        } else {
            throw ConfigError("corpus format must be lines, jsonl or whole");
        }
    }
    return docs;
}

void cmd_bpe_train(RunConfig& cfg, Streams& io) {
    require_set(cfg, "out");
    const auto docs = read_documents(cfg.get("corpus"), cfg.get("format"), io);
    const auto vocab = tok::bpe_train(docs, cfg.get_size("vocab_size"));
    vocab.save(cfg.get("out"));
    write_resolved(cfg, "bpe-train", cfg.get("out"));
    io.out << "learned " << vocab.merges().size() << " merges, " << vocab.size() << " tokens\n";
}

void cmd_tokenize(RunConfig& cfg, Streams& io) {
    require_file(cfg.get("vocab"), "vocabulary");
    const auto vocab = tok::BpeVocab::load(cfg.get("vocab"));
    const std::string text = read_input(cfg.get("input"), io, "input text");
    const auto tokens = tok::tokenize(vocab, text);
    if (!cfg.get("tokens").empty()) {
        std::string listing;
        for (const auto& t : tokens) listing += tok::escape_symbol(t) + "\n";
        write_output(cfg.get("tokens"), listing, io);
    }
    std::string name = cfg.get("name");
    if (name.empty()) name = fs::path(cfg.get("vocab")).stem().string();
    const auto m = tok::metrics_from_counts(tokens.size(), utf8::count_scalars(text), tok::count_words(text));
    write_output(cfg.get("metrics"), tok::metrics_csv({{name, m}}), io);
    write_resolved(cfg, "tokenize", cfg.get("metrics"));
}

void cmd_merge_vocabs(RunConfig& cfg, Streams& io) {
    require_set(cfg, "out");
    require_file(cfg.get("a"), "vocabulary a");
    require_file(cfg.get("b"), "vocabulary b");
    tok::MergeOptions opts;
    opts.max_len = cfg.get_size("max_len");
    opts.union_alphabet = cfg.get_bool("union_alphabet");
    const auto result = tok::merge_vocabs(tok::BpeVocab::load(cfg.get("a")), tok::BpeVocab::load(cfg.get("b")), opts);
    result.merged.save(cfg.get("out"));
    std::string report = cfg.get("report");
    if (report.empty()) report = cfg.get("out") + ".conflicts.json";
    write_file_atomic(report, result.conflicts.to_json());
    write_resolved(cfg, "merge-vocabs", cfg.get("out"));
    const auto& c = result.conflicts;
    io.out << "merged vocabulary: " << result.merged.size() << " tokens; " << c.overlapping_tokens.size()
           << " overlapping tokens, " << c.ambiguous_pairs.size() << " ambiguous pairs, " << c.ambiguous_strings.size()
           << " strings tokenized differently (scanned up to length " << c.scanned_max_len << ")\n";
}

// ---- quantization ---------------------------------------------------------

void cmd_imatrix(RunConfig& cfg, Streams& io) {
    require_set(cfg, "out");
    const auto m = load_model(cfg.get("ckpt"), "checkpoint");
    const auto stream = read_token_stream(cfg.get("calib"), cfg.get("calib_format"), io, "calibration stream");
    check_ids(stream, m.config.vocab_size, "calibration stream");
    const auto im = quant::accumulate_imatrix(m, stream);
    im.save(cfg.get("out"));
    write_resolved(cfg, "imatrix", cfg.get("out"));
    io.out << "importance matrix over " << im.tokens() << " tokens, " << im.columns().size() << " weights\n";
}

void cmd_quantize(RunConfig& cfg, Streams& io) {
    require_set(cfg, "out");
    const auto m = load_model(cfg.get("ckpt"), "checkpoint");
    quant::QuantScheme scheme;
    scheme.bits = static_cast<int>(cfg.get_int("bits"));
    scheme.block_size = cfg.get_size("block_size");
    quant::ImportanceMatrix im;
    if (!cfg.get("imatrix").empty()) {
        require_file(cfg.get("imatrix"), "importance matrix");
        im = quant::ImportanceMatrix::load(cfg.get("imatrix"));
        scheme.imatrix_enabled = true;
    }
    scheme.validate();
    const auto q = quant::quantize_model(m, scheme, scheme.imatrix_enabled ? &im : nullptr,
                                         std::max<std::size_t>(1, cfg.get_size("jobs")));
    model::save_checkpoint(q.model, cfg.get("out"));
    json info = {{"scheme", scheme.label()},
                 {"bits", scheme.bits},
                 {"block_size", scheme.block_size},
                 {"imatrix", scheme.imatrix_enabled},
                 {"size_bytes", q.size_bytes}};
    write_file_atomic(cfg.get("out") + ".quant.json", info.dump(2) + "\n");
    write_resolved(cfg, "quantize", cfg.get("out"));
    io.out << scheme.label() << (scheme.imatrix_enabled ? " (imatrix)" : "") << ": " << q.size_bytes << " bytes\n";
}

void cmd_fidelity(RunConfig& cfg, Streams& io) {
    const auto ref = load_model(cfg.get("ref"), "reference checkpoint");
    const auto q = load_model(cfg.get("quant"), "quantized checkpoint");
    const auto stream = read_token_stream(cfg.get("eval"), cfg.get("eval_format"), io, "evaluation stream");
    check_ids(stream, std::min(ref.config.vocab_size, q.config.vocab_size), "evaluation stream");
    auto report = quant::fidelity(ref, q, stream, std::max<std::size_t>(1, cfg.get_size("jobs")));

    // Scheme details come from the quantizer's sidecar when there is one.
    const fs::path sidecar = cfg.get("quant") + ".quant.json";
    report.scheme = "F32";
    report.size_bytes = 4 * q.params.count();
    if (fs::is_regular_file(sidecar)) {
        try {
            const json info = json::parse(read_file(sidecar));
            report.scheme = info.at("scheme").get<std::string>();
            report.imatrix = info.at("imatrix").get<bool>();
            report.size_bytes = info.at("size_bytes").get<std::uint64_t>();
        } catch (const json::exception& e) {
            throw FormatError("malformed quantization sidecar " + sidecar.string() + ": " + e.what());
        }
    }
    if (!cfg.get("scheme").empty()) report.scheme = cfg.get("scheme");
    write_output(cfg.get("out"), quant::fidelity_csv_header() + quant::fidelity_csv_row(report), io);
    write_resolved(cfg, "fidelity", cfg.get("out"));
}

// ---- report ---------------------------------------------------------------

int scheme_bits(const std::string& scheme) {
    std::size_t i = 0;
    while (i < scheme.size() && !std::isdigit(static_cast<unsigned char>(scheme[i]))) ++i;
    int bits = 0;
    std::from_chars(scheme.data() + i, scheme.data() + scheme.size(), bits);
    return bits;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string render_quant_table(std::vector<quant::FidelityReport> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        const int ba = scheme_bits(a.scheme), bb = scheme_bits(b.scheme);
        if (ba != bb) return ba > bb;
        return !a.imatrix && b.imatrix;
    });
    std::string out = "| Quant. | imatrix | Size [GiB] | PPL | ΔPPL | KLD | Mean Δp | RMS Δp | Same top p [%] |\n";
    out += "|---|---|---|---|---|---|---|---|---|\n";
    if (!rows.empty()) out += "| F32 | - | - | " + fmt("%.4f", rows.front().ppl_ref) + " | - | - | - | - | - |\n";
    for (const auto& r : rows) {
        out += "| " + r.scheme + " | " + (r.imatrix ? "Yes" : "No") + " | " + fmt("%.6f", r.size_gib()) + " | " +
               fmt("%.4f", r.ppl_q) + " | " + fmt("%.4f", r.delta_ppl) + " | " + fmt("%.4f", r.kld_mean) + " | " +
               fmt("%.4f", r.mean_dp) + " | " + fmt("%.4f", r.rms_dp) + " | " + fmt("%.4f", r.same_top_p) + " |\n";
    }
    return out;
}

void cmd_report(RunConfig& cfg, Streams& io) {
    const fs::path dir = cfg.get("dir");
    if (!fs::is_directory(dir)) throw ConfigError("run directory not found: " + dir.string());
    std::vector<fs::path> csvs;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") csvs.push_back(e.path());
    }
    std::sort(csvs.begin(), csvs.end());
    std::vector<quant::FidelityReport> quant_rows;
    std::vector<std::string> tok_rows;
    for (const auto& p : csvs) {
        const std::string text = read_file(p);
        const auto first_nl = text.find('\n');
        const std::string header = text.substr(0, first_nl == std::string::npos ? text.size() : first_nl + 1);
        if (header == quant::fidelity_csv_header()) {
            for (auto& r : quant::parse_fidelity_csv(text)) quant_rows.push_back(std::move(r));
        } else if (header == "tokenizer,tokens,CpT,TpW\n") {
            std::istringstream ss(text.substr(header.size()));
            for (std::string line; std::getline(ss, line);) {
                if (!line.empty()) tok_rows.push_back(line);
            }
        }
    }
    std::string md;
    if (!quant_rows.empty()) md += "## Quantization fidelity\n\n" + render_quant_table(quant_rows) + "\n";
    if (!tok_rows.empty()) {
        md += "## Tokenizer efficiency\n\n| Tokenizer | Tokens | CpT | TpW |\n|---|---|---|---|\n";
        for (const auto& line : tok_rows) {
            std::string row = "| ";
            for (char c : line) row += c == ',' ? std::string(" | ") : std::string(1, c);
            md += row + " |\n";
        }
        md += "\n";
    }
    if (md.empty()) md = "No fidelity or tokenizer CSV files found in " + dir.string() + ".\n";
    write_output(cfg.get("out"), md, io);
    write_resolved(cfg, "report", cfg.get("out"));
}

// ---- registry ---------------------------------------------------------------

std::vector<Command> commands() {
    using corpus::Stage;
    return {
        {"train", "train a model on instruction data", train_schema(), cmd_train},
        {"init", "write a freshly initialized checkpoint",
         {{"model", "desk", "model architecture"}, {"seed", "0", "root random seed"}, {"out", "", "output checkpoint"}},
         cmd_init},
        {"generate", "continue a prompt with a checkpoint",
         {{"ckpt", "", "checkpoint"},
          {"prompt", "", "prompt text"},
          {"chat", "on", "wrap the prompt in the chat template"},
          {"max_new", "64", "tokens to generate"},
          {"temperature", "0", "sampling temperature (0 = greedy)"},
          {"seed", "0", "root random seed"}},
         cmd_generate},
        {"clean", "clean and anonymize documents", corpus_schema(false),
         [](RunConfig& c, Streams& io) { run_corpus_stage(Stage::Clean, "clean", c, io); }},
        {"classify", "score document quality", corpus_schema(true),
         [](RunConfig& c, Streams& io) { run_corpus_stage(Stage::Classify, "classify", c, io); }},
        {"gate", "apply the quality threshold to scored documents", corpus_schema(false),
         [](RunConfig& c, Streams& io) { run_corpus_stage(Stage::Gate, "gate", c, io); }},
        {"pipeline", "clean, classify and gate in one pass", corpus_schema(true),
         [](RunConfig& c, Streams& io) { run_corpus_stage(Stage::Full, "pipeline", c, io); }},
        {"train-classifier", "train the document quality classifier", train_classifier_schema(), cmd_train_classifier},
        {"bpe-train", "learn a BPE vocabulary",
         {{"corpus", "", "training text"},
          {"format", "lines", "corpus layout: lines, jsonl or whole"},
          {"vocab_size", "512", "target vocabulary size"},
          {"out", "", "output vocabulary file"}},
         cmd_bpe_train},
        {"tokenize", "tokenize a text and report efficiency metrics",
         {{"vocab", "", "vocabulary file"},
          {"input", "-", "input text"},
          {"name", "", "tokenizer label in the metrics (default: vocabulary file name)"},
          {"metrics", "-", "metrics CSV output"},
          {"tokens", "", "optional token listing output"}},
         cmd_tokenize},
        {"merge-vocabs", "combine two vocabularies and analyse merge conflicts",
         {{"a", "", "first vocabulary"},
          {"b", "", "second vocabulary"},
          {"out", "", "merged vocabulary output"},
          {"report", "", "conflict report (default: <out>.conflicts.json)"},
          {"max_len", "6", "longest string in the exhaustive scan"},
          {"union_alphabet", "off", "accept vocabularies with different alphabets", true}},
         cmd_merge_vocabs},
        {"imatrix", "collect an importance matrix from calibration text",
         {{"ckpt", "", "checkpoint"},
          {"calib", "", "calibration stream"},
          {"calib_format", "text", "stream format: text or ids"},
          {"out", "", "output file"}},
         cmd_imatrix},
        {"quantize", "block-quantize a checkpoint",
         {{"ckpt", "", "checkpoint"},
          {"bits", "8", "bits per weight (2-8)"},
          {"block_size", "32", "values per block"},
          {"imatrix", "", "importance matrix file"},
          {"out", "", "output checkpoint"},
          {"jobs", "1", "worker threads"}},
         cmd_quantize},
        {"fidelity", "compare a quantized checkpoint with its reference",
         {{"ref", "", "reference checkpoint"},
          {"quant", "", "quantized checkpoint"},
          {"eval", "", "evaluation stream"},
          {"eval_format", "text", "stream format: text or ids"},
          {"scheme", "", "scheme label (default: from the quantizer's sidecar)"},
          {"out", "-", "CSV output"},
          {"jobs", "1", "worker threads"}},
         cmd_fidelity},
        {"report", "render Markdown tables from a run directory",
         {{"dir", ".", "run directory"}, {"out", "-", "Markdown output"}},
         cmd_report},
    };
}

std::string flag_name(const std::string& key) {
    std::string s = key;
    std::replace(s.begin(), s.end(), '_', '-');
    return "--" + s;
}

}  // namespace

std::string version_string() {
    return std::string("wlab ") + WLAB_VERSION + " (checkpoint format " + std::to_string(model::kCheckpointVersion) +
           ", classifier format " + std::to_string(corpus::kGbtFormatVersion) + ", imatrix format " +
           std::to_string(quant::kImatrixFormatVersion) + ")";
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const TrainingAbort*>(&e)) return kExitTrainingAbort;
    if (dynamic_cast<const NumericError*>(&e)) return kExitTrainingAbort;
    if (dynamic_cast<const DataError*>(&e)) return kExitData;
    if (dynamic_cast<const FormatError*>(&e)) return kExitArtifact;
    if (dynamic_cast<const ShapeError*>(&e)) return kExitArtifact;
    return kExitFailure;
}

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    Streams io{in, out, err};
    CLI::App app{"Desk-scale language model lab: training, corpus quality, tokenizers and quantization.", "wlab"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);

    const auto cmds = commands();
    struct Bound {
        CLI::App* sub;
        std::string config_path;
        std::map<std::string, std::string> values;
    };
    std::vector<Bound> bound(cmds.size());
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        auto& b = bound[i];
        b.sub = app.add_subcommand(cmds[i].name, cmds[i].help);
        b.sub->add_option("--config", b.config_path, "key=value configuration file; flags override it");
        for (const auto& spec : cmds[i].schema) {
            const std::string names = flag_name(spec.key) + (spec.key.find('_') != std::string::npos ? ",--" + spec.key : "");
            std::string help = spec.help;
            if (!spec.default_value.empty()) help += " [" + spec.default_value + "]";
            if (spec.flag) {
                b.sub->add_flag(names + "{on}", b.values[spec.key], help);
            } else {
                b.sub->add_option(names, b.values[spec.key], help);
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    for (std::size_t i = 0; i < cmds.size(); ++i) {
        auto& b = bound[i];
        if (!b.sub->parsed()) continue;
        try {
            std::map<std::string, std::string> flags;
            for (const auto& spec : cmds[i].schema) {
                if (b.sub->count(flag_name(spec.key)) > 0) flags[spec.key] = b.values[spec.key];
            }
            const auto file_values = b.config_path.empty() ? std::map<std::string, std::string>{}
                                                           : RunConfig::parse_file(b.config_path);
            RunConfig cfg = RunConfig::resolve(cmds[i].schema, file_values, flags);
            cmds[i].body(cfg, io);
            return kExitOk;
        } catch (const std::exception& e) {
            err << "wlab " << cmds[i].name << ": error: " << e.what() << "\n";
            return exit_code_for(e);
        }
    }
    return kExitConfig;
}

}  // namespace wlab::cli
