#include "edgekit/model.hpp"

#include <iostream>

#include "edgekit/parallel.hpp"

namespace edgekit {

ParserModel init_model(const ModelConfig& cfg, const Vocabulary& vocab, Rng& rng,
                       const PretrainedVectors* pretrained) {
    ParserModel m;
    m.config = cfg;
    m.vocab = vocab;
    m.enc = register_encoder(m.store, cfg.encoder, vocab, rng, pretrained);
    m.edge = register_edge_model(m.store, cfg.encoder.proj_dim, vocab.label_count(), rng);
    return m;
}

SentenceFeatures encode_sentence(const ParserModel& m, const Sentence& s) {
    Tape tape(/*grad_enabled=*/false);
    Rng no_dropout(0);
    TokenFeatures f = m.encoder().run(tape, s, m.vocab, /*train=*/false, no_dropout);
    return SentenceFeatures{tape.value(f.h_dep), tape.value(f.h_head)};
}

EdgePairs gold_pairs(const Sentence& s) {
    EdgePairs pairs;
    pairs.reserve(s.length());
    for (const auto& tok : s.tokens) {
        require(tok.has_head(), "sentence has a token without a gold head");
        pairs.emplace_back(static_cast<size_t>(tok.head), static_cast<size_t>(tok.index));
    }
    return pairs;
}

PrecomputeResult precompute_support(const ParserModel& m, const Treebank& tb, Similarity kind,
                                    size_t n_threads, bool build_index) {
    require(!tb.sentences.empty(), "precompute needs a non-empty treebank");
    const size_t d = m.config.encoder.proj_dim;
    const size_t n_labels = m.vocab.label_count();

    // Per-sentence gold-edge reps, computed in parallel, reduced in order.
    std::vector<Tensor> reps(tb.sentences.size());
    parallel_for(tb.sentences.size(), n_threads, [&](size_t si) {
        SentenceFeatures f = encode_sentence(m, tb.sentences[si]);
        reps[si] = edge_reps(f.h_dep, f.h_head, gold_pairs(tb.sentences[si]),
                             m.edge.comp->value);
    });

    PrecomputeResult out;
    out.summary.kind = kind;
    out.summary.param_hash = m.param_hash();
    out.summary.h_sum_head = Tensor(1, d);
    out.summary.h_sum_label = Tensor(n_labels, d);
    out.summary.label_counts.assign(n_labels, 0);
    out.index.param_hash = m.param_hash();

    size_t total_edges = 0;
    for (const auto& s : tb.sentences) total_edges += s.length();
    if (build_index) {
        out.index.vectors = Tensor(total_edges, d);
        out.index.norms.reserve(total_edges);
        out.index.entries.reserve(total_edges);
    }

    size_t row = 0;
    for (size_t si = 0; si < tb.sentences.size(); ++si) {
        const Sentence& sent = tb.sentences[si];
        for (size_t e = 0; e < sent.tokens.size(); ++e) {
            const Token& tok = sent.tokens[e];
            const Real* rep = reps[si].row_ptr(e);
            Real norm = l2_norm(rep, d);
            size_t label = m.vocab.label_id(tok.deprel);
            if (kind == Similarity::cos) {
                require(norm > Real(0), "zero-norm edge representation under cos (sentence ",
                        si, ", head ", tok.head, ", dep ", tok.index, ", form '", tok.form,
                        "')");
                for (size_t c = 0; c < d; ++c) {
                    out.summary.h_sum_head.v[c] += rep[c] / norm;
                    out.summary.h_sum_label.at(label, c) += rep[c] / norm;
                }
            } else {
                for (size_t c = 0; c < d; ++c) {
                    out.summary.h_sum_head.v[c] += rep[c];
                    out.summary.h_sum_label.at(label, c) += rep[c];
                }
            }
            ++out.summary.head_count;
            ++out.summary.label_counts[label];
            if (build_index) {
                std::copy(rep, rep + d, out.index.vectors.row_ptr(row));
                out.index.norms.push_back(norm);
                ExplainEntry entry;
                entry.sentence_id = static_cast<std::uint32_t>(si);
                entry.head_index = static_cast<std::uint16_t>(tok.head);
                entry.dep_index = static_cast<std::uint16_t>(tok.index);
                entry.label_id = static_cast<std::int32_t>(label);
                entry.head_form = tok.head == 0 ? "<root>" : sent.token(tok.head).form;
                entry.dep_form = tok.form;
                out.index.entries.push_back(std::move(entry));
            }
            ++row;
        }
    }
    for (size_t r = 0; r < n_labels; ++r) {
        if (out.summary.label_counts[r] == 0)
            std::cerr << "edgekit: warning: label '" << m.vocab.label_name(r)
                      << "' has no support edges; its sum is zero\n";
    }
    return out;
}

}  // namespace edgekit
