#pragma once

#include <functional>
#include <span>

#include "dancer/corpus.hpp"
#include "dancer/seqops.hpp"

namespace dancer {

struct SimilarityError : std::runtime_error {
    explicit SimilarityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Frozen autoencoder used as the semantic similarity referee. Parameters are
// fixed for the lifetime of an attack run once frozen.
struct JudgeModel {
    EncoderDecoderConfig config;
    ParamSet params;
    bool frozen = false;

    uint64_t checksum() const { return params.value_checksum(); }
};

struct SentenceEmbedding {
    Tensor vector;
    std::vector<int32_t> source_ids;
};

struct PretrainOptions {
    int64_t epochs = 1000;
    real_t lr = 0.0002;
    int64_t batch_size = 50;
    uint64_t seed = 1;
    // stop once the epoch-mean reconstruction NLL falls below this; 0 disables
    real_t stop_below_nll = 0.0;
    // called after each epoch with (epoch, mean nll)
    std::function<void(int64_t, real_t)> progress;
    // when set, an epoch snapshot is kept here and named on divergence
    std::filesystem::path checkpoint_file;
};

// Initializes a fresh autoencoder and trains teacher-forced self
// reconstruction with Adam; the returned model is frozen.
JudgeModel pretrain_judge(const std::vector<EncodedExample>& train,
                          const EncoderDecoderConfig& config, const PretrainOptions& opt);

// Concatenation of the top layer's final forward and final backward states.
SentenceEmbedding encode_sentence(const JudgeModel& judge, std::span<const int32_t> ids);

real_t cosine_similarity(const SentenceEmbedding& u, const SentenceEmbedding& v);

// Reward-path variant: an undefined cosine contributes 0 instead of throwing.
real_t cosine_similarity_or_zero(const SentenceEmbedding& u, const SentenceEmbedding& v);

}  // namespace dancer
