#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "dancer/corpus.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    std::string cmd = std::string(DANCER_BIN) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::vector<std::string> read_lines(const fs::path& file) {
    std::ifstream in(file);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("cli pipeline runs end to end on a synthetic corpus") {
    fs::path dir = fs::temp_directory_path() / "dancer_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    synth::CorpusSpec spec;
    spec.n_docs = 120;
    spec.n_shared = 12;
    spec.n_exclusive = 4;
    spec.doc_len = 6;
    spec.seed = 31;
    synth::write_tsv(dir / "corpus.tsv", synth::make_corpus(spec));

    std::string d = dir.string();

    SUBCASE("happy path") {
        REQUIRE(run("preprocess --input " + d + "/corpus.tsv --format tsv --k 50 --len 6"
                    " --seed 5 --out " + d + "/pre") == 0);

        // vocab file leads with the four marker tokens
        auto vocab_lines = read_lines(dir / "pre" / "vocab.txt");
        REQUIRE(vocab_lines.size() >= 4);
        CHECK(vocab_lines[0] == "<PAD>");
        CHECK(vocab_lines[1] == "<UNK>");
        CHECK(vocab_lines[2] == "<SOS>");
        CHECK(vocab_lines[3] == "<EOS>");

        // split files hold label<TAB>comma-separated ids
        auto train_lines = read_lines(dir / "pre" / "train.tsv");
        REQUIRE_FALSE(train_lines.empty());
        CHECK(train_lines[0].find('\t') != std::string::npos);
        CHECK(fs::exists(dir / "pre" / "manifest.json"));

        REQUIRE(run("train-target --train " + d + "/pre/train.tsv --vocab " + d +
                    "/pre/vocab.txt --alpha 1.0 --out " + d + "/nb.ckpt") == 0);
        REQUIRE(run("eval-target --model " + d + "/nb.ckpt --data " + d +
                    "/pre/validation.tsv") == 0);
        REQUIRE(run("pretrain-judge --train " + d + "/pre/train.tsv --vocab " + d +
                    "/pre/vocab.txt --epochs 3 --lr 0.005 --batch 16 --dims 8,10"
                    " --seed 2 --quiet --out " + d + "/judge.ckpt") == 0);
        REQUIRE(run("select-curriculum --model " + d + "/nb.ckpt --data " + d +
                    "/pre/validation.tsv --fraction 0.5 --out " + d + "/curriculum.tsv") == 0);
        CHECK_FALSE(read_lines(dir / "curriculum.tsv").empty());

        // attack driven by a config file with flag overrides
        {
            std::ofstream cfg(dir / "attack.json");
            cfg << R"({
  "vocab": ")" << d << R"(/pre/vocab.txt",
  "target_model": ")" << d << R"(/nb.ckpt",
  "judge": ")" << d << R"(/judge.ckpt",
  "attack_set": ")" << d << R"(/pre/validation.tsv",
  "eval_set": ")" << d << R"(/pre/test.tsv",
  "out": ")" << d << R"(/run",
  "lambda_adversarial": 0.5,
  "epochs": 1,
  "batch_size": 4,
  "probe_size": 3,
  "seed": 77
})";
        }
        REQUIRE(run("attack --config " + d + "/attack.json") == 0);
        CHECK(fs::exists(dir / "run" / "log.tsv"));
        CHECK(fs::exists(dir / "run" / "eval.tsv"));
        CHECK(fs::exists(dir / "run" / "manifest.json"));
        CHECK(fs::exists(dir / "run" / "ckpt" / "policy_epoch_0001.ckpt"));

        REQUIRE(run("report --policy " + d + "/run/ckpt/policy_epoch_0001.ckpt --model " + d +
                    "/nb.ckpt --judge " + d + "/judge.ckpt --data " + d +
                    "/pre/test.tsv --vocab " + d + "/pre/vocab.txt --samples 3 --emit-csv"
                    " --out " + d + "/report") == 0);
        CHECK(fs::exists(dir / "report" / "metrics.tsv"));
        CHECK(fs::exists(dir / "report" / "metrics.csv"));
        CHECK(fs::exists(dir / "report" / "samples.txt"));
        CHECK(fs::exists(dir / "report" / "manifest.json"));

        // --run picks the best checkpoint from the run manifest
        REQUIRE(run("report --run " + d + "/run --model " + d + "/nb.ckpt --judge " + d +
                    "/judge.ckpt --data " + d + "/pre/test.tsv --vocab " + d +
                    "/pre/vocab.txt --samples 2 --out " + d + "/report_best") == 0);
        CHECK(fs::exists(dir / "report_best" / "metrics.tsv"));
    }

    SUBCASE("error paths use distinct exit codes") {
        // config error: k of zero
        CHECK(run("preprocess --input " + d + "/corpus.tsv --format tsv --k 0 --len 6"
                  " --seed 5 --out " + d + "/pre_bad") == 2);
        // data error: missing input file
        CHECK(run("eval-target --model " + d + "/missing.ckpt --data " + d +
                  "/missing.tsv") == 3);
        // config error: attack without required paths
        CHECK(run("attack --epochs 1") == 2);
        // config error: malformed config file
        {
            std::ofstream bad(dir / "bad.json");
            bad << "{ not json";
        }
        CHECK(run("attack --config " + d + "/bad.json") == 2);
        {
            std::ofstream bad(dir / "unknown.json");
            bad << R"({"no_such_key": 1})";
        }
        CHECK(run("attack --config " + d + "/unknown.json") == 2);
    }

    fs::remove_all(dir);
}
