#ifndef EDGEKIT_ENCODER_HPP
#define EDGEKIT_ENCODER_HPP

#include <vector>

#include "edgekit/conllu.hpp"
#include "edgekit/params.hpp"
#include "edgekit/tape.hpp"
#include "edgekit/vocab.hpp"

namespace edgekit {

struct EncoderConfig {
    size_t word_dim = 300;
    size_t char_dim = 30;
    size_t char_window = 3;
    size_t char_filters = 30;
    size_t lstm_layers = 2;
    size_t lstm_units = 300;  // per direction
    size_t proj_dim = 300;    // d, the dependent/head feature width
    Real dropout = Real(0.3);
};

/// Handles into a ParameterStore for every encoder weight. Gate columns of
/// the LSTM matrices are ordered [input, forget, cell, output].
struct EncoderWeights {
    Parameter* word_emb = nullptr;  // V x word_dim
    Parameter* char_emb = nullptr;  // C x char_dim
    Parameter* conv_w = nullptr;    // (char_window * char_dim) x char_filters
    Parameter* conv_b = nullptr;    // 1 x char_filters
    struct LstmDir {
        Parameter* wx = nullptr;  // in_dim x 4H
        Parameter* wh = nullptr;  // H x 4H
        Parameter* b = nullptr;   // 1 x 4H
    };
    struct LstmLayer {
        LstmDir fw, bw;
    };
    std::vector<LstmLayer> lstm;
    Parameter* proj_dep = nullptr;   // 2H x proj_dim
    Parameter* proj_head = nullptr;  // 2H x proj_dim
};

/// Per-token dependent/head feature rows, position 0 = ROOT.
struct TokenFeatures {
    Var h_dep;   // (T+1) x proj_dim
    Var h_head;  // (T+1) x proj_dim
};

/// Creates all encoder parameters in `store` under "enc." names. When
/// `pretrained` is non-null its covered rows seed the word table and are
/// frozen; UNK, ROOT and uncovered rows stay trainable.
EncoderWeights register_encoder(ParameterStore& store, const EncoderConfig& cfg,
                                const Vocabulary& vocab, Rng& rng,
                                const PretrainedVectors* pretrained = nullptr);

/// Re-binds previously created "enc." parameters (checkpoint reload path).
EncoderWeights bind_encoder(ParameterStore& store, const EncoderConfig& cfg);

class Encoder {
public:
    Encoder(const EncoderConfig& cfg, EncoderWeights w) : cfg_(cfg), w_(std::move(w)) {}

    const EncoderConfig& config() const { return cfg_; }

    /// h_token_t = [word embedding; max-pooled char CNN], rows 0..T.
    /// ROOT (row 0) uses its dedicated word embedding and a zero char vector.
    Var embed_tokens(Tape& t, const Sentence& s, const Vocabulary& v) const;

    /// Stacked BiLSTM over rows 0..T followed by the two projections.
    /// Dropout hits h_token and each BiLSTM layer output when train=true.
    TokenFeatures encode(Tape& t, Var h_token, bool train, Rng& rng) const;

    TokenFeatures run(Tape& t, const Sentence& s, const Vocabulary& v, bool train,
                      Rng& rng) const;

private:
    Var char_cnn(Tape& t, Var char_table, const std::vector<size_t>& char_ids) const;
    Var lstm_direction(Tape& t, Var x, const EncoderWeights::LstmDir& d, bool backward) const;

    EncoderConfig cfg_;
    EncoderWeights w_;
};

}  // namespace edgekit

#endif
