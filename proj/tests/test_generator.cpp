#include <doctest.h>

#include <cmath>

#include "dancer/generator.hpp"
#include "nb_reference.hpp"

using namespace dancer;

namespace {

EncoderDecoderConfig bandit_config(int64_t vocab) {
    EncoderDecoderConfig cfg;
    cfg.vocab_size = vocab;
    cfg.embed_dim = 6;
    cfg.hidden_dim = 8;
    cfg.max_len = 6;
    return cfg;
}

JudgeModel frozen_judge(int64_t vocab, uint64_t seed) {
    JudgeModel judge;
    judge.config = bandit_config(vocab);
    Rng rng(seed);
    Seq2Seq::init_params(judge.config, judge.params, rng);
    judge.frozen = true;
    return judge;
}

OracleHandle toy_oracle() {
    std::vector<EncodedExample> corpus = {{{4, 5}, Label::spam}, {{4, 6}, Label::ham}};
    return OracleHandle(train_nb(corpus, 8, 1.0));
}

}  // namespace

TEST_CASE("baseline follows the decaying average rule") {
    BaselineState b;
    update_baseline(b, 0.7);
    CHECK(b.value == 0.7);
    CHECK(b.initialized);

    b.value = 0.5;
    update_baseline(b, 1.0);
    CHECK(b.value == doctest::Approx(0.505).epsilon(1e-15));

    CHECK_THROWS_AS(update_baseline(b, std::numeric_limits<real_t>::infinity()), TrainError);
}

TEST_CASE("baseline converges geometrically to a constant reward") {
    BaselineState b;
    update_baseline(b, 0.0);  // start away from the target
    const real_t r = 0.8;
    for (int i = 0; i < 1000; ++i) update_baseline(b, r);
    // |value - r| = |v0 - r| * decay^1000
    real_t expected_gap = 0.8 * std::pow(0.99, 1000);
    CHECK(std::abs(b.value - r) == doctest::Approx(expected_gap).epsilon(1e-6));
    CHECK(std::abs(b.value - r) < 1e-4);
}

TEST_CASE("init_policy copies the judge and isolates it") {
    JudgeModel judge = frozen_judge(10, 3);
    uint64_t judge_sum = judge.checksum();

    PolicyModel p1 = init_policy(judge);
    PolicyModel p2 = init_policy(judge);
    REQUIRE(p1.params.size() == judge.params.size());
    for (size_t i = 0; i < p1.params.size(); ++i)
        for (int64_t j = 0; j < p1.params[i].value.numel(); ++j) {
            CHECK(p1.params[i].value[j] == judge.params[i].value[j]);
            CHECK(p1.params[i].value[j] == p2.params[i].value[j]);
        }

    // perturbing the policy leaves the judge untouched
    p1.params[0].value[0] += 1.0;
    CHECK(judge.checksum() == judge_sum);

    JudgeModel thawed = frozen_judge(10, 4);
    thawed.frozen = false;
    CHECK_THROWS_AS(init_policy(thawed), UsageError);
}

TEST_CASE("freshly initialized policy reconstructs like its judge") {
    JudgeModel judge = frozen_judge(10, 8);
    PolicyModel policy = init_policy(judge);
    std::vector<int32_t> ids{kSos, 5, 7, 9, 4, kEos};

    Seq2Seq judge_net(judge.config, const_cast<ParamSet&>(judge.params));
    Seq2Seq policy_net(policy.config, policy.params);
    auto a = greedy_decode(judge_net, ids, 7);
    auto b = greedy_decode(policy_net, ids, 7);
    CHECK(a == b);
    CHECK(reconstruction_accuracy(policy_net, ids) == reconstruction_accuracy(judge_net, ids));
}

TEST_CASE("sample_rewrite is seed deterministic with bounded length") {
    JudgeModel judge = frozen_judge(10, 12);
    PolicyModel policy = init_policy(judge);
    std::vector<int32_t> ids{kSos, 5, 7, kEos};

    EpisodeRecord a = sample_rewrite(policy, ids, 42, 5);
    EpisodeRecord b = sample_rewrite(policy, ids, 42, 5);
    CHECK(a.output_tokens == b.output_tokens);
    CHECK(a.step_logprobs == b.step_logprobs);
    CHECK(a.output_tokens.size() <= 5);
    CHECK(a.output_tokens.size() == a.step_logprobs.size());
    for (real_t lp : a.step_logprobs) CHECK(lp <= 0.0);

    EpisodeRecord c = sample_rewrite(policy, ids, 43, 5);
    // different seed, overwhelmingly a different draw somewhere
    bool same = a.output_tokens == c.output_tokens;
    CHECK_FALSE(same);

    EpisodeRecord one = sample_rewrite(policy, ids, 7, 1);
    CHECK(one.output_tokens.size() == 1);
}

TEST_CASE("canonical_rewrite re-brackets samples into fixed-length examples") {
    CHECK(canonical_rewrite(std::vector<int32_t>{5, 6, kEos}, 4) ==
          std::vector<int32_t>{kSos, 5, 6, kPad, kPad, kEos});
    CHECK(canonical_rewrite(std::vector<int32_t>{kEos}, 2) ==
          std::vector<int32_t>{kSos, kPad, kPad, kEos});
    CHECK(canonical_rewrite(std::vector<int32_t>{5, 6, 7, 8}, 2) ==
          std::vector<int32_t>{kSos, 5, 6, kEos});
}

TEST_CASE("compute_reward combines the oracle and judge terms linearly") {
    JudgeModel judge = frozen_judge(8, 21);
    OracleHandle oracle = toy_oracle();
    std::vector<int32_t> x{kSos, 4, 5, kEos};
    std::vector<int32_t> x_prime{kSos, 4, 6, kEos};

    SUBCASE("degenerate weights") {
        uint64_t before = oracle.query_count();
        RewardBreakdown adv = compute_reward(x, x_prime, oracle, judge, 1.0, 0.0);
        CHECK(oracle.query_count() == before + 1);
        CHECK(adv.combined == adv.q_minus);

        RewardBreakdown self_sim = compute_reward(x, x, oracle, judge, 0.0, 0.7);
        CHECK(self_sim.similarity == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(self_sim.combined == doctest::Approx(0.7).epsilon(1e-9));
    }
    SUBCASE("linearity across random weights") {
        Rng rng(31);
        for (int trial = 0; trial < 10; ++trial) {
            real_t la = rng.next_real(0, 1);
            real_t ls = rng.next_real(0, 1);
            RewardBreakdown r = compute_reward(x, x_prime, oracle, judge, la, ls);
            CHECK(r.combined == la * r.q_minus + ls * r.similarity);
            CHECK(r.q_minus >= 0.0);
            CHECK(r.q_minus <= 1.0);
            CHECK(r.similarity >= -1.0);
            CHECK(r.similarity <= 1.0);
        }
    }
    SUBCASE("negative weights are rejected") {
        CHECK_THROWS_AS(compute_reward(x, x_prime, oracle, judge, -0.1, 0.5), ConfigError);
    }
}

TEST_CASE("zero-advantage batches change no parameter") {
    JudgeModel judge = frozen_judge(10, 33);
    PolicyModel policy = init_policy(judge);
    uint64_t before = policy.params.value_checksum();

    BaselineState baseline;
    update_baseline(baseline, 0.4);
    AdamState adam(0.01);
    // one non-zero step so optimizer momenta are warm
    std::vector<int32_t> ids{kSos, 5, 7, kEos};
    std::vector<EpisodeRecord> warm(2);
    for (auto& ep : warm) {
        ep = sample_rewrite(policy, ids, 11, 4);
        ep.reward.combined = 0.9;
    }
    reinforce_update(policy, warm, baseline, adam);
    CHECK(policy.params.value_checksum() != before);

    uint64_t mid = policy.params.value_checksum();
    real_t baseline_val = baseline.value;
    std::vector<EpisodeRecord> flat(3);
    for (auto& ep : flat) {
        ep = sample_rewrite(policy, ids, 13, 4);
        ep.reward.combined = baseline_val;  // advantage exactly zero
    }
    reinforce_update(policy, flat, baseline, adam);
    CHECK(policy.params.value_checksum() == mid);
    // the baseline still absorbs the batch
    CHECK(baseline.value == doctest::Approx(baseline_val).epsilon(1e-12));
}

TEST_CASE("positive advantage pushes gradients toward higher log-likelihood") {
    JudgeModel judge = frozen_judge(10, 35);
    PolicyModel policy = init_policy(judge);
    std::vector<int32_t> ids{kSos, 5, 7, kEos};
    EpisodeRecord ep = sample_rewrite(policy, ids, 17, 4);

    // gradient of the REINFORCE loss for one positive-advantage episode
    const real_t advantage = 0.5;
    Seq2Seq net(policy.config, policy.params);
    policy.params.zero_grad();
    {
        Tape tape;
        VarId logp = sequence_logprob_sum(tape, net, ep.input_ids, ep.output_tokens);
        tape.backward(tape.scale(logp, -advantage));
    }
    std::vector<Tensor> loss_grads;
    for (const auto& p : policy.params) loss_grads.push_back(p.grad);

    // gradient of the episode log-likelihood itself
    policy.params.zero_grad();
    {
        Tape tape;
        VarId logp = sequence_logprob_sum(tape, net, ep.input_ids, ep.output_tokens);
        tape.backward(logp);
    }

    real_t dot = 0.0;
    for (size_t i = 0; i < policy.params.size(); ++i)
        for (int64_t j = 0; j < loss_grads[i].numel(); ++j)
            dot += loss_grads[i][j] * policy.params[i].grad[j];
    policy.params.zero_grad();
    // descending the loss ascends the log-likelihood of the rewarded episode
    CHECK(dot < 0.0);
}

TEST_CASE("recorded logprobs match the update-path recomputation exactly") {
    JudgeModel judge = frozen_judge(10, 36);
    PolicyModel policy = init_policy(judge);
    std::vector<int32_t> ids{kSos, 5, 7, 9, kEos};
    EpisodeRecord ep = sample_rewrite(policy, ids, 23, 6);

    Seq2Seq net(policy.config, policy.params);
    Tape tape;
    VarId logp = sequence_logprob_sum(tape, net, ep.input_ids, ep.output_tokens);
    real_t recorded = 0.0;
    for (real_t lp : ep.step_logprobs) recorded += lp;
    CHECK(tape.val(logp)[0] == recorded);
}

TEST_CASE("judge checksum survives policy updates") {
    JudgeModel judge = frozen_judge(10, 40);
    uint64_t sum = judge.checksum();
    PolicyModel policy = init_policy(judge);
    BaselineState baseline;
    AdamState adam(0.01);
    std::vector<int32_t> ids{kSos, 5, 7, kEos};
    for (int round = 0; round < 5; ++round) {
        std::vector<EpisodeRecord> eps(2);
        for (size_t i = 0; i < eps.size(); ++i) {
            eps[i] = sample_rewrite(policy, ids, static_cast<uint64_t>(round * 2 + i), 4);
            eps[i].reward.combined = static_cast<real_t>(i) * 0.3;
        }
        reinforce_update(policy, eps, baseline, adam);
    }
    CHECK(judge.checksum() == sum);
}
