#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dancer/harness.hpp"
#include "nb_reference.hpp"

using namespace dancer;
namespace fs = std::filesystem;

TEST_CASE("token diversity ratio ignores marker tokens") {
    // 30 content tokens alternating between two types
    std::vector<int32_t> alternating;
    for (int i = 0; i < 30; ++i) alternating.push_back(i % 2 ? 8 : 9);
    CHECK(token_diversity_ratio(alternating) == doctest::Approx(2.0 / 30.0));

    std::vector<int32_t> distinct;
    for (int32_t i = 0; i < 30; ++i) distinct.push_back(kNumSpecials + i);
    CHECK(token_diversity_ratio(distinct) == doctest::Approx(1.0));

    std::vector<int32_t> with_markers{kSos, 8, 8, kPad, kPad, kEos};
    CHECK(token_diversity_ratio(with_markers) == doctest::Approx(1.0 / 2.0));

    std::vector<int32_t> only_markers{kSos, kPad, kEos};
    CHECK(token_diversity_ratio(only_markers) == 1.0);
}

TEST_CASE("collapse detector flags repetitive outputs and stays flagged") {
    // the collapse-style sample: "! ! ! ! ) ) ) ) ..." as two token types over 30 slots
    std::vector<int32_t> collapsed;
    for (int i = 0; i < 30; ++i) collapsed.push_back(i < 4 ? 10 : 11);
    REQUIRE(token_diversity_ratio(collapsed) < 0.2);

    std::vector<int32_t> healthy;
    for (int32_t i = 0; i < 30; ++i) healthy.push_back(kNumSpecials + i);

    CollapseDetector detector(0.2, 5);
    std::vector<std::vector<int32_t>> bad_batch(10, collapsed);
    for (int b = 0; b < 4; ++b) {
        auto rep = detector.observe(bad_batch);
        CHECK_FALSE(rep.flagged);
    }
    auto rep = detector.observe(bad_batch);
    CHECK(rep.flagged);
    CHECK(rep.first_flagged_batch == 4);

    // sticky even through healthy batches
    std::vector<std::vector<int32_t>> good_batch(10, healthy);
    auto later = detector.observe(good_batch);
    CHECK(later.flagged);
    CHECK(later.first_flagged_batch == 4);

    // diverse outputs never flag a fresh detector
    CollapseDetector clean(0.2, 5);
    for (int b = 0; b < 50; ++b) CHECK_FALSE(clean.observe(good_batch).flagged);

    // a healthy batch inside the window resets the consecutive count
    CollapseDetector reset(0.2, 5);
    for (int b = 0; b < 4; ++b) reset.observe(bad_batch);
    reset.observe(good_batch);
    for (int b = 0; b < 4; ++b) CHECK_FALSE(reset.observe(bad_batch).flagged);
}

TEST_CASE("detect_mode_collapse single-batch wrapper") {
    std::vector<int32_t> collapsed(30, 9);
    std::vector<std::vector<int32_t>> batch(10, collapsed);
    auto rep = detect_mode_collapse(batch, 0.2, 1);
    CHECK(rep.flagged);
    CHECK(rep.batch_mean == doctest::Approx(1.0 / 30.0));
}

TEST_CASE("select_low_confidence picks exactly the lowest-scored items") {
    // toy corpus from the oracle module, confidences hand-derivable
    std::vector<EncodedExample> corpus = {{{0, 1}, Label::spam},
                                          {{0, 2}, Label::spam},
                                          {{3, 2}, Label::ham}};
    OracleHandle oracle(train_nb(corpus, 4, 1.0));

    SUBCASE("three scored examples, fraction 0.34 → the least spammy one") {
        std::vector<EncodedExample> spam = {
            {{0, 1}, Label::spam},   // buy pills: strongly spam
            {{0}, Label::spam},      // buy: spam leaning
            {{3, 2}, Label::spam},   // meeting now: ham-looking content
        };
        auto picked = select_low_confidence(spam, oracle, 0.34);
        REQUIRE(picked.size() == 1);
        CHECK(picked[0].ids == std::vector<int32_t>{3, 2});
    }
    SUBCASE("fraction 1.0 returns everything, lowest first") {
        std::vector<EncodedExample> spam = {{{0, 1}, Label::spam}, {{3, 2}, Label::spam}};
        auto picked = select_low_confidence(spam, oracle, 1.0);
        REQUIRE(picked.size() == 2);
        CHECK(picked[0].ids == std::vector<int32_t>{3, 2});
        CHECK(picked[1].ids == std::vector<int32_t>{0, 1});
    }
    SUBCASE("guards") {
        CHECK_THROWS_AS(select_low_confidence({}, oracle, 0.1), DataError);
        std::vector<EncodedExample> mixed = {{{0}, Label::ham}};
        CHECK_THROWS_AS(select_low_confidence(mixed, oracle, 0.1), DataError);
        std::vector<EncodedExample> spam = {{{0}, Label::spam}};
        CHECK_THROWS_AS(select_low_confidence(spam, oracle, 0.0), ConfigError);
        CHECK_THROWS_AS(select_low_confidence(spam, oracle, 1.5), ConfigError);
    }
}

TEST_CASE("select_low_confidence matches a full-sort reference on 1717 items") {
    // vocabulary of two tokens; frequency mix controls the score
    std::vector<EncodedExample> train;
    for (int i = 0; i < 40; ++i) {
        train.push_back({{0, 0, 1}, Label::spam});
        train.push_back({{1, 1, 0}, Label::ham});
    }
    NBModel model = train_nb(train, 2, 1.0);
    OracleHandle oracle(model);

    Rng rng(404);
    std::vector<EncodedExample> items;
    for (int i = 0; i < 1717; ++i) {
        EncodedExample ex;
        ex.label = Label::spam;
        int64_t len = 6;
        for (int64_t t = 0; t < len; ++t)
            ex.ids.push_back(static_cast<int32_t>(rng.next_index(2)));
        items.push_back(ex);
    }
    auto picked = select_low_confidence(items, oracle, 0.10);
    CHECK(picked.size() == 171);

    // reference: full stable sort by (p_spam, original index)
    OracleHandle scorer(model);
    std::vector<std::pair<real_t, size_t>> scored;
    for (size_t i = 0; i < items.size(); ++i)
        scored.push_back({scorer.classify(items[i].ids).p_spam, i});
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 0; i < picked.size(); ++i)
        CHECK(picked[i].ids == items[scored[i].second].ids);

    // oracle was queried once per example
    CHECK(oracle.query_count() == items.size());
}

TEST_CASE("attack config json round trip and validation") {
    nlohmann::json j = {{"vocab", "v.txt"},
                        {"target_model", "nb.ckpt"},
                        {"judge", "j.ckpt"},
                        {"attack_set", "a.tsv"},
                        {"out", "runs/x"},
                        {"lambda_adversarial", {0.5, 0.9}},
                        {"epochs", 3},
                        {"batch_size", 10},
                        {"lr", 0.0002},
                        {"seed", 99},
                        {"curriculum", {{"mode", "low_confidence"}, {"fraction", 0.25}}},
                        {"collapse", {{"threshold", 0.3}, {"window", 4}, {"early_stop", false}}}};
    AttackConfig c = AttackConfig::from_json(j);
    CHECK(c.vocab_file == "v.txt");
    CHECK(c.lambda_adversarial == std::vector<double>{0.5, 0.9});
    CHECK(c.curriculum.mode == CurriculumConfig::Mode::low_confidence);
    CHECK(c.curriculum.fraction == 0.25);
    CHECK(c.collapse.window == 4);
    CHECK_FALSE(c.collapse.early_stop);
    CHECK(c.seed == 99);

    AttackConfig back = AttackConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());

    CHECK_THROWS_AS(AttackConfig::from_json({{"typo_key", 1}}), ConfigError);
    CHECK_THROWS_AS(AttackConfig::from_json({{"lambda_adversarial", 1.5}}), ConfigError);
    CHECK_THROWS_AS(
        AttackConfig::from_json({{"curriculum", {{"mode", "full"}, {"fraction", 0.0}}}}),
        ConfigError);
}

TEST_CASE("default lambda sweep matches the published regimen") {
    CHECK(default_lambda_sweep() == std::vector<double>{0.5, 0.8, 0.9, 0.95});
}
