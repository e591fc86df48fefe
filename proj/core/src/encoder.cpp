#include "edgekit/encoder.hpp"

#include <algorithm>

#include "edgekit/common.hpp"

namespace edgekit {

namespace {
std::string lstm_name(size_t layer, bool backward, const char* part) {
    return "enc.lstm" + std::to_string(layer) + (backward ? ".bw." : ".fw.") + part;
}
}  // namespace

EncoderWeights register_encoder(ParameterStore& store, const EncoderConfig& cfg,
                                const Vocabulary& vocab, Rng& rng,
                                const PretrainedVectors* pretrained) {
    require(cfg.char_window >= 1 && cfg.char_filters >= 1 && cfg.lstm_layers >= 1 &&
                cfg.lstm_units >= 1 && cfg.proj_dim >= 1,
            "encoder config has a zero dimension");
    const size_t word_dim = cfg.word_dim;
    if (pretrained != nullptr) {
        require(pretrained->rows.n_rows == vocab.word_count(),
                "pretrained vector table covers ", pretrained->rows.n_rows,
                " words, vocabulary has ", vocab.word_count());
        require(pretrained->dim == word_dim, "pretrained vectors are ", pretrained->dim,
                "-dimensional but word_dim is ", word_dim);
    }
    EncoderWeights w;
    w.word_emb = &store.create_uniform("enc.word_emb", vocab.word_count(), word_dim, Real(-0.1),
                                       Real(0.1), rng);
    if (pretrained != nullptr) {
        w.word_emb->frozen_rows.assign(vocab.word_count(), 0);
        for (size_t r = 0; r < vocab.word_count(); ++r) {
            if (!pretrained->covered[r]) continue;
            std::copy(pretrained->rows.row_ptr(r), pretrained->rows.row_ptr(r) + word_dim,
                      w.word_emb->value.row_ptr(r));
            w.word_emb->frozen_rows[r] = 1;
        }
    }
    w.char_emb = &store.create_uniform("enc.char_emb", vocab.char_count(), cfg.char_dim,
                                       Real(-0.1), Real(0.1), rng);
    w.conv_w = &store.create_glorot("enc.char_conv.w", cfg.char_window * cfg.char_dim,
                                    cfg.char_filters, rng);
    w.conv_b = &store.create("enc.char_conv.b", 1, cfg.char_filters);

    const size_t h = cfg.lstm_units;
    size_t in_dim = word_dim + cfg.char_filters;
    for (size_t l = 0; l < cfg.lstm_layers; ++l) {
        EncoderWeights::LstmLayer layer;
        for (bool backward : {false, true}) {
            auto& d = backward ? layer.bw : layer.fw;
            d.wx = &store.create_glorot(lstm_name(l, backward, "wx"), in_dim, 4 * h, rng);
            d.wh = &store.create_glorot(lstm_name(l, backward, "wh"), h, 4 * h, rng);
            d.b = &store.create(lstm_name(l, backward, "b"), 1, 4 * h);
            // forget-gate bias 1: keeps early cell states alive
            for (size_t c = h; c < 2 * h; ++c) d.b->value.v[c] = Real(1);
        }
        w.lstm.push_back(layer);
        in_dim = 2 * h;
    }
    w.proj_dep = &store.create_glorot("enc.proj_dep", 2 * h, cfg.proj_dim, rng);
    w.proj_head = &store.create_glorot("enc.proj_head", 2 * h, cfg.proj_dim, rng);
    return w;
}

EncoderWeights bind_encoder(ParameterStore& store, const EncoderConfig& cfg) {
    EncoderWeights w;
    w.word_emb = &store.get("enc.word_emb");
    w.char_emb = &store.get("enc.char_emb");
    w.conv_w = &store.get("enc.char_conv.w");
    w.conv_b = &store.get("enc.char_conv.b");
    for (size_t l = 0; l < cfg.lstm_layers; ++l) {
        EncoderWeights::LstmLayer layer;
        for (bool backward : {false, true}) {
            auto& d = backward ? layer.bw : layer.fw;
            d.wx = &store.get(lstm_name(l, backward, "wx"));
            d.wh = &store.get(lstm_name(l, backward, "wh"));
            d.b = &store.get(lstm_name(l, backward, "b"));
        }
        w.lstm.push_back(layer);
    }
    w.proj_dep = &store.get("enc.proj_dep");
    w.proj_head = &store.get("enc.proj_head");
    return w;
}

Var Encoder::char_cnn(Tape& t, Var char_table, const std::vector<size_t>& char_ids) const {
    require(!char_ids.empty(), "char CNN on an empty character sequence");
    std::vector<size_t> padded = char_ids;
    while (padded.size() < cfg_.char_window) padded.push_back(Vocabulary::kCharPad);
    Var embedded = t.gather_rows(char_table, padded);

    const size_t positions = padded.size() - cfg_.char_window + 1;
    std::vector<size_t> window_ids;
    window_ids.reserve(positions * cfg_.char_window);
    for (size_t p = 0; p < positions; ++p)
        for (size_t k = 0; k < cfg_.char_window; ++k) window_ids.push_back(p + k);

    Var windows = t.reshape(t.gather_rows(embedded, window_ids), positions,
                            cfg_.char_window * cfg_.char_dim);
    Var conv = t.tanh(t.add(t.matmul(windows, t.leaf(*w_.conv_w)), t.leaf(*w_.conv_b)));
    return t.max_rows(conv);  // 1 x char_filters
}

Var Encoder::embed_tokens(Tape& t, const Sentence& s, const Vocabulary& v) const {
    Var word_table = t.leaf(*w_.word_emb);
    Var char_table = t.leaf(*w_.char_emb);

    std::vector<size_t> word_ids;
    word_ids.reserve(s.length() + 1);
    word_ids.push_back(Vocabulary::kWordRoot);
    for (const auto& tok : s.tokens) word_ids.push_back(v.word_id(tok.form));
    Var words = t.gather_rows(word_table, word_ids);

    std::vector<Var> char_parts;
    char_parts.reserve(s.length() + 1);
    char_parts.push_back(t.constant(Tensor(1, cfg_.char_filters)));  // ROOT: zero char vector
    for (const auto& tok : s.tokens) {
        std::vector<size_t> ids = v.char_id_seq(tok.form);
        if (ids.empty()) ids.push_back(Vocabulary::kCharUnk);
        char_parts.push_back(char_cnn(t, char_table, ids));
    }
    return t.concat_cols(words, t.concat_rows(char_parts));
}

Var Encoder::lstm_direction(Tape& t, Var x, const EncoderWeights::LstmDir& d,
                            bool backward) const {
    const size_t h = cfg_.lstm_units;
    const size_t steps = t.value(x).n_rows;
    Var xg = t.add(t.matmul(x, t.leaf(*d.wx)), t.leaf(*d.b));  // steps x 4H
    Var wh = t.leaf(*d.wh);

    Var h_prev = t.constant(Tensor(1, h));
    Var c_prev = t.constant(Tensor(1, h));
    std::vector<Var> hs(steps);
    for (size_t step = 0; step < steps; ++step) {
        const size_t pos = backward ? steps - 1 - step : step;
        Var gates = t.add(t.gather_rows(xg, {pos}), t.matmul(h_prev, wh));
        Var gi = t.sigmoid(t.slice_cols(gates, 0, h));
        Var gf = t.sigmoid(t.slice_cols(gates, h, 2 * h));
        Var gc = t.tanh(t.slice_cols(gates, 2 * h, 3 * h));
        Var go = t.sigmoid(t.slice_cols(gates, 3 * h, 4 * h));
        Var c = t.add(t.mul(gf, c_prev), t.mul(gi, gc));
        Var hv = t.mul(go, t.tanh(c));
        hs[pos] = hv;
        h_prev = hv;
        c_prev = c;
    }
    return t.concat_rows(hs);  // steps x H, in position order
}

TokenFeatures Encoder::encode(Tape& t, Var h_token, bool train, Rng& rng) const {
    Var x = t.dropout(h_token, cfg_.dropout, train, rng);
    for (const auto& layer : w_.lstm) {
        Var fw = lstm_direction(t, x, layer.fw, false);
        Var bw = lstm_direction(t, x, layer.bw, true);
        x = t.dropout(t.concat_cols(fw, bw), cfg_.dropout, train, rng);
    }
    TokenFeatures f;
    f.h_dep = t.matmul(x, t.leaf(*w_.proj_dep));
    f.h_head = t.matmul(x, t.leaf(*w_.proj_head));
    return f;
}

TokenFeatures Encoder::run(Tape& t, const Sentence& s, const Vocabulary& v, bool train,
                           Rng& rng) const {
    return encode(t, embed_tokens(t, s, v), train, rng);
}

}  // namespace edgekit
