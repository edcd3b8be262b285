#include "dancer/layers.hpp"

#include <cmath>
#include <string>

namespace dancer {

void EncoderDecoderConfig::validate() const {
    if (vocab_size < 1 || embed_dim < 1 || hidden_dim < 1 || max_len < 1)
        throw ConfigError("encoder-decoder dimensions must be >= 1");
    if (encoder_layers < 1 || decoder_layers != 1)
        throw ConfigError("supported layout is encoder_layers >= 1, decoder_layers == 1");
}

namespace {

void init_uniform(Tensor& t, Rng& rng, real_t lo, real_t hi) {
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.next_real(lo, hi);
}

std::string cell_prefix(int64_t layer, int64_t dir) {
    return "enc.l" + std::to_string(layer) + (dir == 0 ? ".fw" : ".bw");
}

}  // namespace

void Seq2Seq::init_params(const EncoderDecoderConfig& cfg, ParamSet& params, Rng& rng) {
    cfg.validate();
    const int64_t H = cfg.hidden_dim;
    const int64_t E = cfg.embed_dim;
    const int64_t V = cfg.vocab_size;
    const int64_t S = cfg.encoder_state_dim();
    const int64_t dirs = cfg.bidirectional_encoder ? 2 : 1;

    // fan-in scaled uniform; flat small init starves the content pathways
    // relative to the output bias and the net converges to the marginal
    auto weight = [&](const std::string& name, std::vector<int64_t> shape) {
        Parameter& p = params.add(name, std::move(shape));
        real_t bound = 1.0 / std::sqrt(static_cast<real_t>(p.value.cols()));
        init_uniform(p.value, rng, -bound, bound);
    };
    auto cell_bias = [&](const std::string& name) {
        Parameter& p = params.add(name, {4 * H});
        // forget gate bias starts at 1
        for (int64_t i = H; i < 2 * H; ++i) p.value[i] = 1.0;
    };

    Parameter& ee = params.add("enc.embed", {V, E});
    init_uniform(ee.value, rng, -0.5, 0.5);
    Parameter& de = params.add("dec.embed", {V, E});
    init_uniform(de.value, rng, -0.5, 0.5);

    for (int64_t l = 0; l < cfg.encoder_layers; ++l) {
        int64_t in = l == 0 ? E : S;
        for (int64_t d = 0; d < dirs; ++d) {
            std::string pre = cell_prefix(l, d);
            weight(pre + ".w_ih", {4 * H, in});
            weight(pre + ".w_hh", {4 * H, H});
            cell_bias(pre + ".bias");
        }
    }

    weight("dec.w_ih", {4 * H, E});
    weight("dec.w_hh", {4 * H, H});
    cell_bias("dec.bias");

    weight("attn.w", {H, S});
    weight("attn.comb.w", {H, S + H});
    params.add("attn.comb.b", {H});
    weight("out.w", {V, H});
    params.add("out.b", {V});
    weight("bridge.h.w", {H, S});
    params.add("bridge.h.b", {H});
    weight("bridge.c.w", {H, S});
    params.add("bridge.c.b", {H});
}

Seq2Seq::Seq2Seq(const EncoderDecoderConfig& config, ParamSet& params) : config_(config) {
    config_.validate();
    auto need = [&](const std::string& name) {
        Parameter* p = params.find(name);
        if (!p) throw UsageError("parameter set missing " + name);
        return p;
    };
    enc_embed_ = need("enc.embed");
    dec_embed_ = need("dec.embed");
    const int64_t dirs = config_.bidirectional_encoder ? 2 : 1;
    enc_cells_.resize(static_cast<size_t>(config_.encoder_layers));
    for (int64_t l = 0; l < config_.encoder_layers; ++l) {
        for (int64_t d = 0; d < dirs; ++d) {
            std::string pre = cell_prefix(l, d);
            LstmCellParams cell{need(pre + ".w_ih"), need(pre + ".w_hh"), need(pre + ".bias")};
            enc_cells_[static_cast<size_t>(l)].push_back(cell);
        }
    }
    dec_cell_ = {need("dec.w_ih"), need("dec.w_hh"), need("dec.bias")};
    attn_w_ = need("attn.w");
    attn_comb_w_ = need("attn.comb.w");
    attn_comb_b_ = need("attn.comb.b");
    out_w_ = need("out.w");
    out_b_ = need("out.b");
    bridge_h_w_ = need("bridge.h.w");
    bridge_h_b_ = need("bridge.h.b");
    bridge_c_w_ = need("bridge.c.w");
    bridge_c_b_ = need("bridge.c.b");
}

LstmState Seq2Seq::lstm_step(Tape& tape, const LstmCellParams& cell, VarId x,
                             const LstmState& prev) const {
    const int64_t H = config_.hidden_dim;
    VarId pre = tape.add(tape.add(tape.matvec(tape.leaf(*cell.w_ih), x),
                                  tape.matvec(tape.leaf(*cell.w_hh), prev.h)),
                         tape.leaf(*cell.bias));
    VarId gi = tape.sigmoid(tape.slice(pre, 0, H));
    VarId gf = tape.sigmoid(tape.slice(pre, H, H));
    VarId go = tape.sigmoid(tape.slice(pre, 2 * H, H));
    VarId gc = tape.tanh_(tape.slice(pre, 3 * H, H));
    VarId c = tape.add(tape.mul(gf, prev.c), tape.mul(gi, gc));
    VarId h = tape.mul(go, tape.tanh_(c));
    return {h, c};
}

std::vector<VarId> Seq2Seq::run_direction(Tape& tape, const LstmCellParams& cell,
                                          const std::vector<VarId>& inputs, bool reverse) const {
    const int64_t H = config_.hidden_dim;
    const int64_t T = static_cast<int64_t>(inputs.size());
    LstmState state{tape.constant(Tensor::zeros({H})), tape.constant(Tensor::zeros({H}))};
    std::vector<VarId> out(static_cast<size_t>(T));
    for (int64_t i = 0; i < T; ++i) {
        int64_t t = reverse ? T - 1 - i : i;
        state = lstm_step(tape, cell, inputs[static_cast<size_t>(t)], state);
        out[static_cast<size_t>(t)] = state.h;
    }
    return out;
}

Seq2Seq::Encoded Seq2Seq::encode(Tape& tape, std::span<const int32_t> ids) const {
    if (ids.empty()) throw UsageError("encode on empty sequence");
    if (static_cast<int64_t>(ids.size()) > config_.max_len + 2)
        throw UsageError("sequence longer than max_len + 2");
    for (int32_t id : ids)
        if (id < 0 || id >= config_.vocab_size)
            throw DataError("token id " + std::to_string(id) + " out of vocabulary range");

    VarId table = tape.leaf(*enc_embed_);
    std::vector<VarId> layer_in;
    layer_in.reserve(ids.size());
    for (int32_t id : ids) layer_in.push_back(tape.embedding_row(table, id));

    std::vector<VarId> fw, bw;
    for (size_t l = 0; l < enc_cells_.size(); ++l) {
        fw = run_direction(tape, enc_cells_[l][0], layer_in, false);
        if (config_.bidirectional_encoder) {
            bw = run_direction(tape, enc_cells_[l][1], layer_in, true);
            std::vector<VarId> merged(fw.size());
            for (size_t t = 0; t < fw.size(); ++t) merged[t] = tape.concat(fw[t], bw[t]);
            layer_in = std::move(merged);
        } else {
            layer_in = fw;
        }
    }

    Encoded enc;
    enc.step_states = layer_in;
    enc.states_matrix = tape.stack_rows(layer_in);
    // final forward state is at the last position, final backward at the first
    enc.sentence = config_.bidirectional_encoder
                       ? tape.concat(fw.back(), bw.front())
                       : fw.back();
    return enc;
}

Seq2Seq::DecoderCtx Seq2Seq::decoder_context(Tape& tape, const Encoded& enc) const {
    return {enc.states_matrix, tape.matmul_nt(enc.states_matrix, tape.leaf(*attn_w_))};
}

LstmState Seq2Seq::initial_decoder_state(Tape& tape, const Encoded& enc) const {
    VarId h = tape.tanh_(tape.add(tape.matvec(tape.leaf(*bridge_h_w_), enc.sentence),
                                  tape.leaf(*bridge_h_b_)));
    VarId c = tape.tanh_(tape.add(tape.matvec(tape.leaf(*bridge_c_w_), enc.sentence),
                                  tape.leaf(*bridge_c_b_)));
    return {h, c};
}

Seq2Seq::DecodeStep Seq2Seq::decode_step(Tape& tape, int32_t prev_token, const LstmState& state,
                                         const DecoderCtx& ctx) const {
    if (prev_token < 0 || prev_token >= config_.vocab_size)
        throw DataError("decoder token id out of vocabulary range");
    VarId x = tape.embedding_row(tape.leaf(*dec_embed_), prev_token);
    LstmState next = lstm_step(tape, dec_cell_, x, state);
    // bilinear attention scores against every encoder position
    VarId scores = tape.matvec(ctx.attn_proj, next.h);
    VarId weights = tape.softmax(scores);
    VarId context = tape.matvec_t(ctx.states_matrix, weights);
    VarId combined = tape.tanh_(tape.add(
        tape.matvec(tape.leaf(*attn_comb_w_), tape.concat(context, next.h)),
        tape.leaf(*attn_comb_b_)));
    VarId logits = tape.add(tape.matvec(tape.leaf(*out_w_), combined), tape.leaf(*out_b_));
    return {next, logits, weights};
}

}  // namespace dancer
