#include "dancer/judge.hpp"

#include <cmath>

#include "dancer/adam.hpp"
#include "dancer/model_io.hpp"

namespace dancer {

JudgeModel pretrain_judge(const std::vector<EncodedExample>& train,
                          const EncoderDecoderConfig& config, const PretrainOptions& opt) {
    config.validate();
    if (train.empty()) throw DataError("empty pretraining set");
    if (opt.batch_size < 1) throw ConfigError("batch size must be positive");

    JudgeModel judge;
    judge.config = config;
    Rng init_rng(derive_seed(opt.seed, kSeedInit));
    Seq2Seq::init_params(config, judge.params, init_rng);
    Seq2Seq net(judge.config, judge.params);

    AdamState adam(opt.lr);
    std::vector<size_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int64_t epoch = 0; epoch < opt.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(opt.seed, kSeedShuffle, static_cast<uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        real_t epoch_nll = 0.0;
        int64_t batches = 0;
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(opt.batch_size)) {
            size_t end = std::min(order.size(), start + static_cast<size_t>(opt.batch_size));
            Tape tape;
            std::vector<VarId> losses;
            for (size_t i = start; i < end; ++i)
                losses.push_back(teacher_forced_nll(tape, net, train[order[i]].ids));
            VarId loss = tape.scale(tape.sum(losses), 1.0 / static_cast<real_t>(losses.size()));
            real_t value = tape.val(loss)[0];
            if (!std::isfinite(value)) {
                std::string where = opt.checkpoint_file.empty()
                                        ? "(no checkpoint configured)"
                                        : opt.checkpoint_file.string();
                throw TrainError("judge pretraining diverged at epoch " + std::to_string(epoch) +
                                 "; last checkpoint: " + where);
            }
            tape.backward(loss);
            adam.step(judge.params);
            epoch_nll += value;
            ++batches;
        }
        if (!opt.checkpoint_file.empty()) {
            Checkpoint ckpt;
            ckpt.metadata["kind"] = "judge";
            ckpt.metadata["epoch"] = epoch;
            ckpt.metadata["config"] = config_to_json(judge.config);
            ckpt.add_params(judge.params);
            ckpt.save(opt.checkpoint_file);
        }
        real_t mean_nll = epoch_nll / static_cast<real_t>(batches);
        if (opt.progress) opt.progress(epoch, mean_nll);
        if (opt.stop_below_nll > 0.0 && mean_nll < opt.stop_below_nll) break;
    }

    judge.frozen = true;
    return judge;
}

SentenceEmbedding encode_sentence(const JudgeModel& judge, std::span<const int32_t> ids) {
    if (!judge.frozen) throw UsageError("judge must be frozen before encoding sentences");
    Seq2Seq net(judge.config, const_cast<ParamSet&>(judge.params));
    Tape tape;
    auto enc = net.encode(tape, ids);
    SentenceEmbedding emb;
    emb.vector = tape.val(enc.sentence);
    emb.source_ids.assign(ids.begin(), ids.end());
    if (!emb.vector.all_finite()) throw TrainError("non-finite sentence embedding");
    return emb;
}

real_t cosine_similarity(const SentenceEmbedding& u, const SentenceEmbedding& v) {
    if (!u.vector.same_shape(v.vector)) throw UsageError("embedding width mismatch");
    real_t dot = 0.0, nu = 0.0, nv = 0.0;
    for (int64_t i = 0; i < u.vector.numel(); ++i) {
        dot += u.vector[i] * v.vector[i];
        nu += u.vector[i] * u.vector[i];
        nv += v.vector[i] * v.vector[i];
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    if (nu < 1e-12 || nv < 1e-12) throw SimilarityError("zero-norm embedding");
    real_t cs = dot / (nu * nv);
    return std::min<real_t>(1.0, std::max<real_t>(-1.0, cs));
}

real_t cosine_similarity_or_zero(const SentenceEmbedding& u, const SentenceEmbedding& v) {
    try {
        return cosine_similarity(u, v);
    } catch (const SimilarityError&) {
        return 0.0;
    }
}

}  // namespace dancer
