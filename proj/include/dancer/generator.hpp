#pragma once

#include <span>

#include "dancer/adam.hpp"
#include "dancer/judge.hpp"
#include "dancer/oracle.hpp"

namespace dancer {

// The attack policy; same architecture as the judge it was initialized from.
struct PolicyModel {
    EncoderDecoderConfig config;
    ParamSet params;
};

struct RewardBreakdown {
    real_t q_minus = 0.0;      // oracle p_ham of the rewrite
    real_t similarity = 0.0;   // judge cosine between original and rewrite
    real_t lambda_adversarial = 0.0;
    real_t lambda_similar = 0.0;
    real_t combined = 0.0;     // lambda_adv * q_minus + lambda_sim * similarity
};

struct EpisodeRecord {
    std::vector<int32_t> input_ids;      // the original, marker-bracketed example
    std::vector<int32_t> output_tokens;  // sampled rewrite, terminal EOS included when emitted
    std::vector<real_t> step_logprobs;   // one per sampled token, each <= 0
    RewardBreakdown reward;
    real_t baseline_at_update = 0.0;
};

// Exponentially-decaying running average of batch-mean rewards.
struct BaselineState {
    real_t value = 0.0;
    real_t decay = 0.99;
    bool initialized = false;
};

void update_baseline(BaselineState& state, real_t batch_mean_reward);

// Copies judge weights into a fresh policy; the judge stays untouched.
PolicyModel init_policy(const JudgeModel& judge);

// Samples a rewrite of input_ids from the policy, one token distribution per
// step, stopping at EOS or max_len tokens. Reward fields stay unfilled.
EpisodeRecord sample_rewrite(const PolicyModel& policy, std::span<const int32_t> input_ids,
                             uint64_t rng_seed, int64_t max_len);

// Re-brackets sampled tokens as a full-length example: SOS + content padded
// or truncated to content_len + EOS. Keeps oracle and judge inputs in the
// same space the models were trained on.
std::vector<int32_t> canonical_rewrite(std::span<const int32_t> output_tokens,
                                       int64_t content_len);

// Exactly one oracle query; judge embeddings for both sides.
RewardBreakdown compute_reward(std::span<const int32_t> x, std::span<const int32_t> x_prime,
                               const OracleHandle& oracle, const JudgeModel& judge,
                               real_t lambda_adv, real_t lambda_sim);

// One REINFORCE step over a filled batch: advantages against the pre-update
// baseline, a single Adam step, then the baseline absorbs the batch mean.
// When every advantage is exactly zero the parameters are left untouched.
void reinforce_update(PolicyModel& policy, std::vector<EpisodeRecord>& episodes,
                      BaselineState& baseline, AdamState& adam);

}  // namespace dancer
