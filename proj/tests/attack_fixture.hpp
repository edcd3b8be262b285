#pragma once

// Shared end-to-end fixture: a small synthetic corpus pushed through the
// whole pipeline once (preprocess, target training, judge pretraining), with
// every artifact written to a temp directory the way the CLI would.

#include <filesystem>

#include "dancer/harness.hpp"
#include "synthetic.hpp"

namespace fixture {

struct AttackFixture {
    std::filesystem::path dir;
    std::filesystem::path vocab_file, nb_file, judge_file;
    std::filesystem::path train_file, attack_file, eval_file;
    int64_t content_len = 6;

    static const AttackFixture& get() {
        static AttackFixture f = build();
        return f;
    }

  private:
    static AttackFixture build() {
        namespace fs = std::filesystem;
        using namespace dancer;

        AttackFixture f;
        f.dir = fs::temp_directory_path() / "dancer_attack_fixture";
        fs::remove_all(f.dir);
        fs::create_directories(f.dir);

        synth::CorpusSpec spec;
        spec.n_docs = 120;
        spec.n_shared = 12;
        spec.n_exclusive = 4;
        spec.doc_len = 6;
        spec.seed = 11;
        auto raw = synth::make_corpus(spec);
        auto splits = split_dataset(raw, {0.8, 0.1, 0.1}, 3);
        Vocabulary vocab = build_vocabulary(splits.train, 50);

        auto encode_all = [&](const std::vector<RawExample>& rs) {
            std::vector<EncodedExample> out;
            for (const auto& r : rs) out.push_back(encode_example(r, vocab, f.content_len));
            return out;
        };
        auto train = encode_all(splits.train);
        auto validation = encode_all(splits.validation);
        auto test = encode_all(splits.test);

        f.vocab_file = f.dir / "vocab.txt";
        vocab.save(f.vocab_file);
        f.train_file = f.dir / "train.tsv";
        write_split_file(f.train_file, train);
        f.attack_file = f.dir / "attack.tsv";
        write_split_file(f.attack_file, validation);
        f.eval_file = f.dir / "eval.tsv";
        write_split_file(f.eval_file, test);

        f.nb_file = f.dir / "nb.ckpt";
        save_nb_model(train_nb(train, vocab.size(), 1.0), f.nb_file);

        EncoderDecoderConfig cfg;
        cfg.vocab_size = vocab.size();
        cfg.embed_dim = 8;
        cfg.hidden_dim = 10;
        cfg.max_len = f.content_len;
        PretrainOptions opt;
        opt.epochs = 220;
        opt.lr = 0.003;
        opt.batch_size = 16;
        opt.seed = 9;
        f.judge_file = f.dir / "judge.ckpt";
        save_judge(pretrain_judge(train, cfg, opt), f.judge_file);
        return f;
    }
};

inline dancer::AttackConfig base_config(const AttackFixture& f) {
    dancer::AttackConfig c;
    c.vocab_file = f.vocab_file;
    c.target_model = f.nb_file;
    c.judge_checkpoint = f.judge_file;
    c.attack_set = f.attack_file;
    c.eval_set = f.eval_file;
    c.train_data = f.train_file;
    c.lambda_adversarial = {0.5};
    c.epochs = 2;
    c.batch_size = 4;
    c.lr = 0.001;
    c.seed = 21;
    c.probe_size = 4;
    c.sample_dump_every = 1;
    return c;
}

}  // namespace fixture
