#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "dancer/judge.hpp"
#include "dancer/model_io.hpp"
#include "synthetic.hpp"

using namespace dancer;

namespace {

EncoderDecoderConfig small_config(int64_t vocab) {
    EncoderDecoderConfig cfg;
    cfg.vocab_size = vocab;
    cfg.embed_dim = 8;
    cfg.hidden_dim = 12;
    cfg.max_len = 6;
    return cfg;
}

std::vector<EncodedExample> tiny_dataset(int64_t n, int64_t vocab, int64_t content_len,
                                         uint64_t seed) {
    Rng rng(seed);
    std::vector<EncodedExample> out;
    for (int64_t i = 0; i < n; ++i) {
        EncodedExample ex;
        ex.ids.push_back(kSos);
        for (int64_t t = 0; t < content_len; ++t)
            ex.ids.push_back(static_cast<int32_t>(
                kNumSpecials + rng.next_index(static_cast<uint64_t>(vocab - kNumSpecials))));
        ex.ids.push_back(kEos);
        ex.label = i % 2 ? Label::spam : Label::ham;
        out.push_back(std::move(ex));
    }
    return out;
}

JudgeModel make_frozen_judge(int64_t vocab, uint64_t seed) {
    JudgeModel judge;
    judge.config = small_config(vocab);
    Rng rng(seed);
    Seq2Seq::init_params(judge.config, judge.params, rng);
    judge.frozen = true;
    return judge;
}

}  // namespace

TEST_CASE("cosine similarity values and guards") {
    auto embed = [](std::vector<real_t> v) {
        SentenceEmbedding e;
        int64_t n = static_cast<int64_t>(v.size());
        e.vector = Tensor({n}, std::move(v));
        return e;
    };
    CHECK(cosine_similarity(embed({1, 2, 3}), embed({1, 2, 3})) == doctest::Approx(1.0));
    CHECK(cosine_similarity(embed({1, 0}), embed({0, 1})) == doctest::Approx(0.0));
    CHECK(cosine_similarity(embed({1, 2, 3}), embed({4, 5, 6})) ==
          doctest::Approx(32.0 / std::sqrt(14.0 * 77.0)).epsilon(1e-12));
    CHECK_THROWS_AS(cosine_similarity(embed({0, 0}), embed({1, 0})), SimilarityError);
    CHECK(cosine_similarity_or_zero(embed({0, 0}), embed({1, 0})) == 0.0);
    CHECK_THROWS_AS(cosine_similarity(embed({1, 0}), embed({1, 0, 0})), UsageError);
}

TEST_CASE("cosine similarity is symmetric and scale invariant") {
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        SentenceEmbedding u, v;
        u.vector = Tensor({6});
        v.vector = Tensor({6});
        for (int64_t i = 0; i < 6; ++i) {
            u.vector[i] = rng.next_real(-2, 2);
            v.vector[i] = rng.next_real(-2, 2);
        }
        real_t uv = cosine_similarity(u, v);
        CHECK(cosine_similarity(v, u) == uv);
        SentenceEmbedding su = u;
        real_t alpha = rng.next_real(0.1, 9.0);
        for (int64_t i = 0; i < 6; ++i) su.vector[i] *= alpha;
        CHECK(std::abs(cosine_similarity(su, v) - uv) < 1e-9);
        CHECK(uv >= -1.0);
        CHECK(uv <= 1.0);
    }
}

TEST_CASE("encode_sentence is deterministic and input sensitive") {
    JudgeModel judge = make_frozen_judge(12, 5);
    std::vector<int32_t> a{kSos, 5, 7, 9, kEos};
    std::vector<int32_t> b{kSos, 5, 7, 8, kEos};
    auto e1 = encode_sentence(judge, a);
    auto e2 = encode_sentence(judge, a);
    auto e3 = encode_sentence(judge, b);
    REQUIRE(e1.vector.numel() == 2 * judge.config.hidden_dim);
    for (int64_t i = 0; i < e1.vector.numel(); ++i) CHECK(e1.vector[i] == e2.vector[i]);
    bool differ = false;
    for (int64_t i = 0; i < e1.vector.numel(); ++i)
        if (e1.vector[i] != e3.vector[i]) differ = true;
    CHECK(differ);
    CHECK(cosine_similarity(e1, e2) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("encoding with an unfrozen judge is a usage error") {
    JudgeModel judge = make_frozen_judge(12, 6);
    judge.frozen = false;
    std::vector<int32_t> ids{kSos, 5, kEos};
    CHECK_THROWS_AS(encode_sentence(judge, ids), UsageError);
}

TEST_CASE("zero-parameter judge maps every input to the forced constant state") {
    JudgeModel judge = make_frozen_judge(12, 7);
    for (auto& p : judge.params) p.value.zero();
    auto e1 = encode_sentence(judge, std::vector<int32_t>{kSos, 5, 7, kEos});
    auto e2 = encode_sentence(judge, std::vector<int32_t>{kSos, 9, kEos});
    for (int64_t i = 0; i < e1.vector.numel(); ++i) {
        CHECK(e1.vector[i] == 0.0);
        CHECK(e2.vector[i] == 0.0);
    }
}

TEST_CASE("zero-epoch pretraining returns the initialization, frozen") {
    auto data = tiny_dataset(6, 12, 4, 21);
    PretrainOptions opt;
    opt.epochs = 0;
    opt.seed = 77;
    JudgeModel judge = pretrain_judge(data, small_config(12), opt);
    CHECK(judge.frozen);

    ParamSet reference;
    Rng rng(derive_seed(77, kSeedInit));
    Seq2Seq::init_params(small_config(12), reference, rng);
    REQUIRE(reference.size() == judge.params.size());
    for (size_t i = 0; i < reference.size(); ++i)
        for (int64_t j = 0; j < reference[i].value.numel(); ++j)
            CHECK(reference[i].value[j] == judge.params[i].value[j]);
}

TEST_CASE("pretraining reduces reconstruction loss on a tiny corpus") {
    auto data = tiny_dataset(8, 12, 4, 22);
    PretrainOptions opt;
    opt.epochs = 60;
    opt.lr = 0.01;
    opt.batch_size = 4;
    opt.seed = 5;
    real_t first_nll = 0.0, last_nll = 0.0;
    opt.progress = [&](int64_t epoch, real_t nll) {
        if (epoch == 0) first_nll = nll;
        last_nll = nll;
    };
    JudgeModel judge = pretrain_judge(data, small_config(12), opt);
    CHECK(last_nll < first_nll);
    CHECK(judge.frozen);

    // embeddings must stay byte-identical across repeated use
    uint64_t checksum = judge.checksum();
    for (const auto& ex : data) encode_sentence(judge, ex.ids);
    CHECK(judge.checksum() == checksum);

    // self-similarity of every example is exactly 1 within tolerance
    for (const auto& ex : data) {
        auto e = encode_sentence(judge, ex.ids);
        CHECK(std::abs(cosine_similarity(e, e) - 1.0) < 1e-9);
    }
}

TEST_CASE("judge checkpoints round trip through model io") {
    JudgeModel judge = make_frozen_judge(12, 44);
    auto dir = std::filesystem::temp_directory_path() / "dancer_judge_test";
    std::filesystem::create_directories(dir);
    save_judge(judge, dir / "judge.ckpt");
    JudgeModel back = load_judge(dir / "judge.ckpt");
    CHECK(back.frozen);
    CHECK(back.config == judge.config);
    CHECK(back.checksum() == judge.checksum());
    std::filesystem::remove_all(dir);
}
