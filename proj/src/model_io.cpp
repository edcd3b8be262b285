#include "dancer/model_io.hpp"

namespace dancer {

nlohmann::json config_to_json(const EncoderDecoderConfig& c) {
    return {{"vocab_size", c.vocab_size},
            {"embed_dim", c.embed_dim},
            {"hidden_dim", c.hidden_dim},
            {"encoder_layers", c.encoder_layers},
            {"decoder_layers", c.decoder_layers},
            {"bidirectional_encoder", c.bidirectional_encoder},
            {"max_len", c.max_len}};
}

EncoderDecoderConfig config_from_json(const nlohmann::json& j) {
    EncoderDecoderConfig c;
    c.vocab_size = j.at("vocab_size").get<int64_t>();
    c.embed_dim = j.at("embed_dim").get<int64_t>();
    c.hidden_dim = j.at("hidden_dim").get<int64_t>();
    c.encoder_layers = j.at("encoder_layers").get<int64_t>();
    c.decoder_layers = j.at("decoder_layers").get<int64_t>();
    c.bidirectional_encoder = j.at("bidirectional_encoder").get<bool>();
    c.max_len = j.at("max_len").get<int64_t>();
    c.validate();
    return c;
}

void save_nb_model(const NBModel& model, const std::filesystem::path& file) {
    Checkpoint ckpt;
    ckpt.metadata["kind"] = "nb-target";
    ckpt.metadata["alpha"] = model.alpha();
    ckpt.metadata["vocab_size"] = model.vocab_size();
    Tensor prior({2});
    prior[0] = model.log_prior(0);
    prior[1] = model.log_prior(1);
    ckpt.add("nb.log_prior", prior);
    ckpt.add("nb.log_likelihood", model.log_likelihood_table());
    ckpt.save(file);
}

NBModel load_nb_model(const std::filesystem::path& file) {
    Checkpoint ckpt = Checkpoint::load(file);
    if (ckpt.metadata.value("kind", "") != "nb-target")
        throw DataError(file.string() + ": not a target model checkpoint");
    const Tensor& prior = ckpt.require("nb.log_prior");
    return NBModel({prior[0], prior[1]}, ckpt.require("nb.log_likelihood"),
                   ckpt.metadata.at("alpha").get<real_t>());
}

void save_judge(const JudgeModel& judge, const std::filesystem::path& file) {
    Checkpoint ckpt;
    ckpt.metadata["kind"] = "judge";
    ckpt.metadata["config"] = config_to_json(judge.config);
    ckpt.add_params(judge.params);
    ckpt.save(file);
}

JudgeModel load_judge(const std::filesystem::path& file) {
    Checkpoint ckpt = Checkpoint::load(file);
    if (ckpt.metadata.value("kind", "") != "judge")
        throw DataError(file.string() + ": not a judge checkpoint");
    JudgeModel judge;
    judge.config = config_from_json(ckpt.metadata.at("config"));
    Rng dummy(0);
    Seq2Seq::init_params(judge.config, judge.params, dummy);
    ckpt.restore_params(judge.params);
    judge.frozen = true;
    return judge;
}

}  // namespace dancer
