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

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "reference/cli_runner.hpp"
#include "reference/fixtures.hpp"
#include "wlab/cli/run_config.hpp"
#include "wlab/io.hpp"
#include "wlab/quant/fidelity.hpp"
#include "wlab/tok/bpe.hpp"
#include "wlab/tok/metrics.hpp"
#include "wlab/utf8.hpp"

namespace fs = std::filesystem;
using namespace wlab;

namespace {

using clirun::TempDir;

clirun::Proc wlab_cli(const TempDir& dir, const std::vector<std::string>& args, const std::string& input = "") {
    return clirun::run(WLAB_CLI_PATH, dir, args, input);
}

}  // namespace

TEST_CASE("version lists artifact formats") {
    TempDir dir;
    const auto p = wlab_cli(dir, {"--version"});
    CHECK(p.code == 0);
    CHECK(p.out.find("checkpoint format") != std::string::npos);
    CHECK(p.out.find("imatrix format") != std::string::npos);
}

TEST_CASE("configuration errors exit with code 2") {
    TempDir dir;
    CHECK(wlab_cli(dir, {}).code == 2);
    CHECK(wlab_cli(dir, {"train", "--no-such-flag", "1"}).code == 2);
    write_file_atomic(dir / "bad.cfg", "no_such_key = 1\n");
    const auto p = wlab_cli(dir, {"init", "--config", dir / "bad.cfg", "--out", dir / "m.ckpt"});
    CHECK(p.code == 2);
    CHECK(p.err.find("no_such_key") != std::string::npos);
    const auto missing = wlab_cli(dir, {"train", "--data", dir / "absent.jsonl", "--out", dir / "run"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find(dir / "absent.jsonl") != std::string::npos);
    CHECK(wlab_cli(dir, {"train", "--preset", "nope"}).code == 2);
    CHECK(wlab_cli(dir, {"quantize", "--ckpt", dir / "absent.ckpt", "--out", dir / "q"}).code == 2);
}

TEST_CASE("large presets resolve but refuse to train") {
    TempDir dir;
    write_file_atomic(dir / "toy.jsonl", fixtures::instruction_jsonl(4, 1));
    const auto p = wlab_cli(dir, {"train", "--preset", "pretrain-7b", "--data", dir / "toy.jsonl", "--out", dir / "big"});
    CHECK(p.code == 2);
    const auto dry = wlab_cli(dir, {"train", "--preset", "sft-7b", "--dry-run", "--out", dir / "big"});
    REQUIRE(dry.code == 0);
    const auto cfg = cli::RunConfig::parse_file(dir / "big/resolved.cfg");
    CHECK(cfg.at("base_lr") == "7e-06");
    CHECK(cfg.at("min_lr") == "6e-07");
    CHECK(cfg.at("warmup_iters") == "50");
    CHECK(cfg.at("batch_size") == "128");
    CHECK(cfg.at("model") == "full-7b");
}

TEST_CASE("training is deterministic and reproducible from its resolved config") {
    TempDir dir;
    const auto data = dir / "toy.jsonl";
    write_file_atomic(data, fixtures::instruction_jsonl(16, 3));
    const std::vector<std::string> base = {"train", "--preset", "desk", "--data", data, "--seed", "7", "--max_iters", "4"};
    auto with_out = [&](const std::string& out) {
        auto a = base;
        a.push_back("--out");
        a.push_back(out);
        return a;
    };
    const auto r1 = wlab_cli(dir, with_out(dir / "r1"));
    const auto r2 = wlab_cli(dir, with_out(dir / "r2"));
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(read_file(dir / "r1/train.csv") == read_file(dir / "r2/train.csv"));
    CHECK(read_file(dir / "r1/model.ckpt") == read_file(dir / "r2/model.ckpt"));

    // The resolved file alone reproduces the run.
    const auto r3 = wlab_cli(dir, {"train", "--config", dir / "r1/resolved.cfg", "--out", dir / "r3"});
    REQUIRE(r3.code == 0);
    CHECK(read_file(dir / "r3/train.csv") == read_file(dir / "r1/train.csv"));
    CHECK(read_file(dir / "r3/model.ckpt") == read_file(dir / "r1/model.ckpt"));
    auto c1 = cli::RunConfig::parse_file(dir / "r1/resolved.cfg"), c3 = cli::RunConfig::parse_file(dir / "r3/resolved.cfg");
    c1.erase("out");
    c3.erase("out");
    CHECK(c1 == c3);
    CHECK(c1.at("warmup_iters") != "auto");

    // A different seed changes the run, and inputs are never modified.
    const auto r4 = wlab_cli(dir, {"train", "--preset", "desk", "--data", data, "--seed", "8", "--max_iters", "4", "--out",
                                   dir / "r4"});
    REQUIRE(r4.code == 0);
    CHECK(read_file(dir / "r4/train.csv") != read_file(dir / "r1/train.csv"));
    CHECK(read_file(data) == fixtures::instruction_jsonl(16, 3));
}

TEST_CASE("adaptive rate is a no-op when every batch matches the baseline") {
    TempDir dir;
    // Identical samples make every batch carry the same scored-token count.
    const auto one = fixtures::instruction_jsonl(1, 5);
    std::string data;
    for (int i = 0; i < 8; ++i) data += one;
    write_file_atomic(dir / "same.jsonl", data);
    const auto sample = fixtures::instruction_samples(1, 5)[0];
    const std::size_t batch_tokens = 4 * sample.scored_tokens();
    auto run = [&](const std::string& alr, const std::string& out) {
        return wlab_cli(dir, {"train", "--data", dir / "same.jsonl", "--batch-size", "4", "--epochs", "2", "--alr", alr,
                              "--baseline-batch-tokens", std::to_string(batch_tokens), "--out", dir / out});
    };
    REQUIRE(run("on", "on").code == 0);
    REQUIRE(run("off", "off").code == 0);
    CHECK(read_file(dir / "on/train.csv") == read_file(dir / "off/train.csv"));
    // A baseline of half the batch tokens must change the rate when enabled.
    REQUIRE(wlab_cli(dir, {"train", "--data", dir / "same.jsonl", "--batch-size", "4", "--epochs", "2", "--alr", "on",
                           "--baseline-batch-tokens", std::to_string(batch_tokens / 2), "--out", dir / "half"})
                .code == 0);
    CHECK(read_file(dir / "half/train.csv") != read_file(dir / "off/train.csv"));
}

TEST_CASE("checkpoint commands: init, generate and version mismatch") {
    TempDir dir;
    REQUIRE(wlab_cli(dir, {"init", "--seed", "3", "--out", dir / "m.ckpt"}).code == 0);
    CHECK(fs::is_regular_file(dir / "m.ckpt.resolved.cfg"));
    const auto g1 = wlab_cli(dir, {"generate", "--ckpt", dir / "m.ckpt", "--prompt", "kot", "--max-new", "8"});
    const auto g2 = wlab_cli(dir, {"generate", "--ckpt", dir / "m.ckpt", "--prompt", "kot", "--max-new", "8"});
    CHECK(g1.code == 0);
    CHECK(g1.out == g2.out);

    auto bytes = read_file(dir / "m.ckpt");
    bytes[4] = static_cast<char>(bytes[4] + 7);
    write_file_atomic(dir / "future.ckpt", bytes);
    const auto p = wlab_cli(dir, {"generate", "--ckpt", dir / "future.ckpt", "--prompt", "kot"});
    CHECK(p.code == 5);
    CHECK(p.err.find("version") != std::string::npos);
    write_file_atomic(dir / "junk.ckpt", "not a checkpoint");
    CHECK(wlab_cli(dir, {"quantize", "--ckpt", dir / "junk.ckpt", "--out", dir / "q.ckpt"}).code == 5);
}

TEST_CASE("corpus commands: empty input, malformed lines and strict mode") {
    TempDir dir;
    const auto empty = wlab_cli(dir, {"clean"}, "");
    CHECK(empty.code == 0);
    CHECK(empty.out.empty());

    const std::string input = R"({"id":"a","text":"mail: x@y.pl"})" "\n" "not json\n" R"({"id":"b","text":"ok"})" "\n";
    const auto loose = wlab_cli(dir, {"clean"}, input);
    CHECK(loose.code == 0);
    CHECK(loose.err.find("line 2:") != std::string::npos);
    CHECK(loose.out.find("<EMAIL>") != std::string::npos);
    CHECK(std::count(loose.out.begin(), loose.out.end(), '\n') == 2);
    CHECK(wlab_cli(dir, {"clean", "--strict"}, input).code == 4);
}

TEST_CASE("corpus stages composed equal the single pipeline command") {
    TempDir dir;
    write_file_atomic(dir / "labeled.jsonl", fixtures::labeled_jsonl());
    REQUIRE(wlab_cli(dir, {"train-classifier", "--data", dir / "labeled.jsonl", "--out", dir / "q.gbt", "--rounds", "10"})
                .code == 0);
    write_file_atomic(dir / "docs.jsonl", fixtures::documents_jsonl(100, 4));

    const std::vector<std::string> model = {"--model", dir / "q.gbt"};
    REQUIRE(wlab_cli(dir, {"clean", "--input", dir / "docs.jsonl", "--output", dir / "c.jsonl", "--jobs", "3"}).code == 0);
    REQUIRE(wlab_cli(dir, {"classify", "--input", dir / "c.jsonl", "--output", dir / "k.jsonl", "--model", dir / "q.gbt"})
                .code == 0);
    REQUIRE(wlab_cli(dir, {"gate", "--input", dir / "k.jsonl", "--output", dir / "g.jsonl"}).code == 0);
    REQUIRE(wlab_cli(dir, {"pipeline", "--input", dir / "docs.jsonl", "--output", dir / "p.jsonl", "--model",
                           dir / "q.gbt", "--jobs", "4"})
                .code == 0);
    const auto composed = read_file(dir / "g.jsonl");
    CHECK(std::count(composed.begin(), composed.end(), '\n') == 100);
    CHECK(composed == read_file(dir / "p.jsonl"));
    CHECK(fs::is_regular_file(dir / "p.jsonl.resolved.cfg"));

    // Reproducible from the resolved config alone.
    REQUIRE(wlab_cli(dir, {"pipeline", "--config", dir / "p.jsonl.resolved.cfg", "--output", dir / "p2.jsonl"}).code == 0);
    CHECK(read_file(dir / "p2.jsonl") == composed);
    CHECK(read_file(dir / "docs.jsonl") == fixtures::documents_jsonl(100, 4));
}

TEST_CASE("tokenizer commands recompute the library metrics") {
    TempDir dir;
    const std::string corpus = "ala ma kota\nkot ma ale\nzazolc gesla jazn\nala i kot\n";
    write_file_atomic(dir / "corpus.txt", corpus);
    REQUIRE(wlab_cli(dir, {"bpe-train", "--corpus", dir / "corpus.txt", "--vocab-size", "40", "--out", dir / "a.bpe"})
                .code == 0);
    const std::string text = "ala ma kota, a kot ma ale.\nzażółć gęślą jaźń\n";
    write_file_atomic(dir / "text.txt", text);
    const auto p = wlab_cli(dir, {"tokenize", "--vocab", dir / "a.bpe", "--input", dir / "text.txt"});
    REQUIRE(p.code == 0);
    const auto vocab = tok::BpeVocab::load(dir / "a.bpe");
    CHECK(p.out == tok::metrics_csv({{"a", tok::metrics(vocab, text)}}));

    REQUIRE(wlab_cli(dir, {"bpe-train", "--corpus", dir / "corpus.txt", "--vocab-size", "30", "--out", dir / "b.bpe"})
                .code == 0);
    const auto m = wlab_cli(dir, {"merge-vocabs", "--a", dir / "a.bpe", "--b", dir / "b.bpe", "--out", dir / "m.bpe",
                                  "--max-len", "3"});
    REQUIRE(m.code == 0);
    const auto report = nlohmann::json::parse(read_file(dir / "m.bpe.conflicts.json"));
    CHECK(report.contains("ambiguous_pairs"));
    CHECK(tok::BpeVocab::load(dir / "m.bpe").merges().size() == vocab.merges().size());
}

TEST_CASE("quantization commands and the report table") {
    TempDir dir;
    REQUIRE(wlab_cli(dir, {"init", "--seed", "2", "--out", dir / "ref.ckpt"}).code == 0);
    std::string ids;
    for (auto t : fixtures::token_stream(600, 9)) ids += std::to_string(t) + " ";
    write_file_atomic(dir / "eval.ids", ids);

    const auto self = wlab_cli(dir, {"fidelity", "--ref", dir / "ref.ckpt", "--quant", dir / "ref.ckpt", "--eval",
                                     dir / "eval.ids", "--eval-format", "ids"});
    REQUIRE(self.code == 0);
    const auto self_rows = quant::parse_fidelity_csv(self.out);
    REQUIRE(self_rows.size() == 1);
    CHECK(self_rows[0].kld_mean == 0.0);
    CHECK(self_rows[0].delta_ppl == 0.0);
    CHECK(self_rows[0].same_top_p == 100.0);

    REQUIRE(wlab_cli(dir, {"imatrix", "--ckpt", dir / "ref.ckpt", "--calib", dir / "eval.ids", "--calib-format", "ids",
                           "--out", dir / "im.bin"})
                .code == 0);
    fs::create_directories(dir / "study");
    for (const char* bits : {"3", "8", "2", "6", "4", "5"}) {
        const auto q = dir / (std::string("q") + bits + ".ckpt");
        REQUIRE(wlab_cli(dir, {"quantize", "--ckpt", dir / "ref.ckpt", "--bits", bits, "--out", q}).code == 0);
        REQUIRE(wlab_cli(dir, {"fidelity", "--ref", dir / "ref.ckpt", "--quant", q, "--eval", dir / "eval.ids",
                               "--eval-format", "ids", "--out", dir / (std::string("study/q") + bits + ".csv")})
                    .code == 0);
    }
    REQUIRE(wlab_cli(dir, {"quantize", "--ckpt", dir / "ref.ckpt", "--bits", "2", "--imatrix", dir / "im.bin", "--out",
                           dir / "q2i.ckpt"})
                .code == 0);
    REQUIRE(wlab_cli(dir, {"fidelity", "--ref", dir / "ref.ckpt", "--quant", dir / "q2i.ckpt", "--eval", dir / "eval.ids",
                           "--eval-format", "ids", "--out", dir / "study/q2i.csv"})
                .code == 0);
    CHECK(wlab_cli(dir, {"quantize", "--ckpt", dir / "ref.ckpt", "--bits", "9", "--out", dir / "bad.ckpt"}).code == 2);

    const auto rep = wlab_cli(dir, {"report", "--dir", (dir.path / "study").string()});
    REQUIRE(rep.code == 0);
    std::vector<std::string> schemes;
    std::istringstream lines(rep.out);
    for (std::string line; std::getline(lines, line);) {
        if (line.rfind("| Quant.", 0) == 0) continue;
        if (line.rfind("| Q", 0) == 0 || line.rfind("| F32", 0) == 0) schemes.push_back(line.substr(2, line.find(" |", 2) - 2));
    }
    CHECK(schemes == std::vector<std::string>{"F32", "Q8", "Q6", "Q5", "Q4", "Q3", "Q2", "Q2"});
    CHECK(rep.out.find("| Q2 | No |") < rep.out.find("| Q2 | Yes |"));
    CHECK(rep.out.find("| Quant. | imatrix | Size [GiB] | PPL | ΔPPL | KLD | Mean Δp | RMS Δp | Same top p [%] |") !=
          std::string::npos);
}
