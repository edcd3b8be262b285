#include "dancer/seqops.hpp"

#include <cmath>

#include "dancer/corpus.hpp"
#include "dancer/kernels.hpp"

namespace dancer {

namespace {

// One closed-loop decoding pass; pick_token chooses the next token from the
// log-softmax of the step logits.
template <typename Pick>
SampledSequence run_decode(const Seq2Seq& net, std::span<const int32_t> input_ids,
                           int64_t max_steps, Pick pick_token) {
    Tape tape;
    auto enc = net.encode(tape, input_ids);
    auto ctx = net.decoder_context(tape, enc);
    LstmState state = net.initial_decoder_state(tape, enc);

    SampledSequence out;
    int32_t prev = kSos;
    for (int64_t step = 0; step < max_steps; ++step) {
        auto dec = net.decode_step(tape, prev, state, ctx);
        const Tensor& logits = tape.val(dec.logits);
        Tensor ls(logits.shape());
        kernels::log_softmax(ls.data(), logits.data(), logits.numel());
        int32_t tok = pick_token(ls);
        out.tokens.push_back(tok);
        out.logprobs.push_back(ls[tok]);
        if (tok == kEos) break;
        prev = tok;
        state = dec.state;
    }
    return out;
}

}  // namespace

std::vector<int32_t> greedy_decode(const Seq2Seq& net, std::span<const int32_t> input_ids,
                                   int64_t max_steps) {
    auto seq = run_decode(net, input_ids, max_steps, [](const Tensor& ls) {
        int32_t best = 0;
        for (int64_t i = 1; i < ls.numel(); ++i)
            if (ls[i] > ls[best]) best = static_cast<int32_t>(i);
        return best;
    });
    return seq.tokens;
}

SampledSequence sample_decode(const Seq2Seq& net, std::span<const int32_t> input_ids, Rng& rng,
                              int64_t max_steps) {
    return run_decode(net, input_ids, max_steps, [&rng](const Tensor& ls) {
        real_t u = rng.next_real();
        real_t cdf = 0.0;
        int64_t n = ls.numel();
        for (int64_t i = 0; i < n; ++i) {
            cdf += std::exp(ls[i]);
            if (u < cdf) return static_cast<int32_t>(i);
        }
        return static_cast<int32_t>(n - 1);  // rounding spill
    });
}

VarId teacher_forced_nll(Tape& tape, const Seq2Seq& net, std::span<const int32_t> ids) {
    if (ids.size() < 2) throw UsageError("teacher forcing needs at least two positions");
    auto enc = net.encode(tape, ids);
    auto ctx = net.decoder_context(tape, enc);
    LstmState state = net.initial_decoder_state(tape, enc);

    std::vector<VarId> logps;
    for (size_t t = 1; t < ids.size(); ++t) {
        auto dec = net.decode_step(tape, ids[t - 1], state, ctx);
        logps.push_back(tape.log_prob_pick(dec.logits, ids[t]));
        state = dec.state;
    }
    return tape.scale(tape.sum(logps), -1.0 / static_cast<real_t>(logps.size()));
}

VarId sequence_logprob_sum(Tape& tape, const Seq2Seq& net, std::span<const int32_t> input_ids,
                           std::span<const int32_t> output_tokens) {
    if (output_tokens.empty()) throw UsageError("empty output sequence");
    auto enc = net.encode(tape, input_ids);
    auto ctx = net.decoder_context(tape, enc);
    LstmState state = net.initial_decoder_state(tape, enc);

    std::vector<VarId> logps;
    int32_t prev = kSos;
    for (int32_t tok : output_tokens) {
        auto dec = net.decode_step(tape, prev, state, ctx);
        logps.push_back(tape.log_prob_pick(dec.logits, tok));
        state = dec.state;
        prev = tok;
    }
    return tape.sum(logps);
}

real_t reconstruction_accuracy(const Seq2Seq& net, std::span<const int32_t> ids) {
    if (ids.size() < 2) throw UsageError("sequence too short");
    int64_t target_len = static_cast<int64_t>(ids.size()) - 1;
    auto out = greedy_decode(net, ids, target_len);
    int64_t hits = 0;
    for (size_t t = 0; t < out.size() && t + 1 < ids.size(); ++t)
        if (out[t] == ids[t + 1]) ++hits;
    return static_cast<real_t>(hits) / static_cast<real_t>(target_len);
}

}  // namespace dancer
