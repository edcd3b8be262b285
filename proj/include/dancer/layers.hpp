#pragma once

#include <span>
#include <vector>

#include "dancer/rng.hpp"
#include "dancer/tape.hpp"

namespace dancer {

struct EncoderDecoderConfig {
    int64_t vocab_size = 0;
    int64_t embed_dim = 32;
    int64_t hidden_dim = 64;   // per direction
    int64_t encoder_layers = 2;
    int64_t decoder_layers = 1;
    bool bidirectional_encoder = true;
    int64_t max_len = 30;      // content length; sequences run max_len + 2 with markers

    void validate() const;
    int64_t encoder_state_dim() const {
        return bidirectional_encoder ? 2 * hidden_dim : hidden_dim;
    }
    bool operator==(const EncoderDecoderConfig&) const = default;
};

// Gate order in the packed 4H pre-activation: input, forget, output, candidate.
struct LstmCellParams {
    Parameter* w_ih = nullptr;  // (4H x in)
    Parameter* w_hh = nullptr;  // (4H x H)
    Parameter* bias = nullptr;  // (4H)
};

struct LstmState {
    VarId h;
    VarId c;
};

// Attentional encoder-decoder over one shared config. Owns nothing; all
// parameters live in the ParamSet handed to the constructor so they can be
// checkpointed and optimized uniformly.
class Seq2Seq {
  public:
    Seq2Seq(const EncoderDecoderConfig& config, ParamSet& params);

    // Registers and initializes all parameters. Weights uniform(-0.08, 0.08),
    // embeddings uniform(-0.1, 0.1), biases zero except forget gates at 1.
    static void init_params(const EncoderDecoderConfig& config, ParamSet& params, Rng& rng);

    struct Encoded {
        std::vector<VarId> step_states;  // top-layer state per position
        VarId states_matrix;             // (T x state_dim) stack of the above
        VarId sentence;                  // final fw state ++ final bw state
    };

    // Runs the full encoder over ids (markers included). Throws on out-of-range ids.
    Encoded encode(Tape& tape, std::span<const int32_t> ids) const;

    struct DecoderCtx {
        VarId states_matrix;  // (T x state_dim)
        VarId attn_proj;      // (T x H), encoder states through the attention bilinear
    };
    struct DecodeStep {
        LstmState state;
        VarId logits;        // (V)
        VarId attn_weights;  // (T)
    };

    DecoderCtx decoder_context(Tape& tape, const Encoded& enc) const;
    LstmState initial_decoder_state(Tape& tape, const Encoded& enc) const;
    DecodeStep decode_step(Tape& tape, int32_t prev_token, const LstmState& state,
                           const DecoderCtx& ctx) const;

    const EncoderDecoderConfig& config() const { return config_; }

  private:
    LstmState lstm_step(Tape& tape, const LstmCellParams& cell, VarId x,
                        const LstmState& prev) const;
    std::vector<VarId> run_direction(Tape& tape, const LstmCellParams& cell,
                                     const std::vector<VarId>& inputs, bool reverse) const;

    EncoderDecoderConfig config_;
    // encoder cells: [layer][direction]; direction 1 only when bidirectional
    std::vector<std::vector<LstmCellParams>> enc_cells_;
    LstmCellParams dec_cell_;
    Parameter* enc_embed_ = nullptr;
    Parameter* dec_embed_ = nullptr;
    Parameter* attn_w_ = nullptr;    // (H x state_dim)
    Parameter* attn_comb_w_ = nullptr;  // (H x (state_dim + H))
    Parameter* attn_comb_b_ = nullptr;  // (H)
    Parameter* out_w_ = nullptr;     // (V x H)
    Parameter* out_b_ = nullptr;     // (V)
    Parameter* bridge_h_w_ = nullptr;  // (H x state_dim)
    Parameter* bridge_h_b_ = nullptr;
    Parameter* bridge_c_w_ = nullptr;
    Parameter* bridge_c_b_ = nullptr;
};

}  // namespace dancer
