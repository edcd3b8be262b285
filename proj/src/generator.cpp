#include "dancer/generator.hpp"

#include <cmath>
#include <sstream>

namespace dancer {

void update_baseline(BaselineState& state, real_t batch_mean_reward) {
    if (!std::isfinite(batch_mean_reward))
        throw TrainError("non-finite reward in baseline update");
    if (!state.initialized) {
        state.value = batch_mean_reward;
        state.initialized = true;
    } else {
        state.value = state.decay * state.value + (1.0 - state.decay) * batch_mean_reward;
    }
}

PolicyModel init_policy(const JudgeModel& judge) {
    if (!judge.frozen) throw UsageError("policy must be initialized from a frozen judge");
    PolicyModel policy;
    policy.config = judge.config;
    Rng dummy(0);
    Seq2Seq::init_params(policy.config, policy.params, dummy);
    policy.params.copy_values_from(judge.params);
    return policy;
}

EpisodeRecord sample_rewrite(const PolicyModel& policy, std::span<const int32_t> input_ids,
                             uint64_t rng_seed, int64_t max_len) {
    if (max_len < 1) throw UsageError("rewrite sampling needs max_len >= 1");
    Seq2Seq net(policy.config, const_cast<ParamSet&>(policy.params));
    Rng rng(rng_seed);
    SampledSequence seq = sample_decode(net, input_ids, rng, max_len);
    EpisodeRecord ep;
    ep.input_ids.assign(input_ids.begin(), input_ids.end());
    ep.output_tokens = std::move(seq.tokens);
    ep.step_logprobs = std::move(seq.logprobs);
    return ep;
}

std::vector<int32_t> canonical_rewrite(std::span<const int32_t> output_tokens,
                                       int64_t content_len) {
    std::vector<int32_t> ids;
    ids.reserve(static_cast<size_t>(content_len) + 2);
    ids.push_back(kSos);
    int64_t n = 0;
    for (int32_t tok : output_tokens) {
        if (tok == kEos || n == content_len) break;
        ids.push_back(tok);
        ++n;
    }
    for (; n < content_len; ++n) ids.push_back(kPad);
    ids.push_back(kEos);
    return ids;
}

RewardBreakdown compute_reward(std::span<const int32_t> x, std::span<const int32_t> x_prime,
                               const OracleHandle& oracle, const JudgeModel& judge,
                               real_t lambda_adv, real_t lambda_sim) {
    if (lambda_adv < 0.0 || lambda_sim < 0.0)
        throw ConfigError("reward weights must be nonnegative");
    RewardBreakdown r;
    r.lambda_adversarial = lambda_adv;
    r.lambda_similar = lambda_sim;
    r.q_minus = oracle.classify(x_prime).p_ham;
    r.similarity = cosine_similarity_or_zero(encode_sentence(judge, x),
                                             encode_sentence(judge, x_prime));
    r.combined = lambda_adv * r.q_minus + lambda_sim * r.similarity;
    return r;
}

void reinforce_update(PolicyModel& policy, std::vector<EpisodeRecord>& episodes,
                      BaselineState& baseline, AdamState& adam) {
    if (episodes.empty()) throw UsageError("empty episode batch");

    real_t mean_reward = 0.0;
    for (auto& ep : episodes) {
        ep.baseline_at_update = baseline.initialized ? baseline.value : 0.0;
        mean_reward += ep.reward.combined;
    }
    mean_reward /= static_cast<real_t>(episodes.size());

    bool all_zero = true;
    for (const auto& ep : episodes)
        if (ep.reward.combined - ep.baseline_at_update != 0.0) all_zero = false;

    if (!all_zero) {
        Seq2Seq net(policy.config, policy.params);
        Tape tape;
        std::vector<VarId> terms;
        for (const auto& ep : episodes) {
            real_t advantage = ep.reward.combined - ep.baseline_at_update;
            VarId logp = sequence_logprob_sum(tape, net, ep.input_ids, ep.output_tokens);
            terms.push_back(tape.scale(logp, advantage));
        }
        VarId loss = tape.scale(tape.sum(terms), -1.0 / static_cast<real_t>(terms.size()));
        real_t value = tape.val(loss)[0];
        if (!std::isfinite(value)) {
            std::ostringstream dump;
            dump << "non-finite policy loss; episode dump:";
            for (const auto& ep : episodes) {
                dump << " [r=" << ep.reward.combined << " out=";
                for (size_t i = 0; i < ep.output_tokens.size(); ++i)
                    dump << (i ? "," : "") << ep.output_tokens[i];
                dump << "]";
            }
            throw TrainError(dump.str());
        }
        policy.params.zero_grad();
        tape.backward(loss);
        adam.step(policy.params);
    }

    update_baseline(baseline, mean_reward);
}

}  // namespace dancer
