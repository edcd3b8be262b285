#pragma once

#include <span>
#include <vector>

#include "dancer/layers.hpp"
#include "dancer/rng.hpp"

namespace dancer {

// Routines that drive a Seq2Seq over whole sequences. Sampling and greedy
// decoding build a throwaway tape and read values only, so the math is the
// same code path the training update differentiates through.

struct SampledSequence {
    std::vector<int32_t> tokens;    // generated tokens, terminal EOS included when emitted
    std::vector<real_t> logprobs;   // log p of each generated token, recorded at draw time
};

// Closed-loop decode starting from SOS; stops after EOS or max_steps tokens.
std::vector<int32_t> greedy_decode(const Seq2Seq& net, std::span<const int32_t> input_ids,
                                   int64_t max_steps);

SampledSequence sample_decode(const Seq2Seq& net, std::span<const int32_t> input_ids, Rng& rng,
                              int64_t max_steps);

// Mean token cross-entropy of teacher-forced reconstruction: predicts
// ids[1..] from ids[..-1] with the encoder run over the full sequence.
VarId teacher_forced_nll(Tape& tape, const Seq2Seq& net, std::span<const int32_t> ids);

// Sum of log p(output_k | input, output_{<k}) recomputed through the
// network for an already-sampled token sequence.
VarId sequence_logprob_sum(Tape& tape, const Seq2Seq& net, std::span<const int32_t> input_ids,
                           std::span<const int32_t> output_tokens);

// Greedy closed-loop decode scored position-wise against ids[1..].
real_t reconstruction_accuracy(const Seq2Seq& net, std::span<const int32_t> ids);

}  // namespace dancer
