#ifndef EDGEKIT_MODEL_HPP
#define EDGEKIT_MODEL_HPP

#include <cstdint>
#include <string>

#include "edgekit/conllu.hpp"
#include "edgekit/edge_model.hpp"
#include "edgekit/encoder.hpp"
#include "edgekit/params.hpp"
#include "edgekit/vocab.hpp"

namespace edgekit {

struct ModelConfig {
    EncoderConfig encoder;
    ScoringConfig scoring;
    Task task = Task::head;
};

/// One trained (or freshly initialized) model: the vocabulary it was built
/// over, every parameter, and typed handles into them. Move-only.
struct ParserModel {
    ModelConfig config;
    Vocabulary vocab;
    ParameterStore store;
    EncoderWeights enc;
    EdgeModelWeights edge;
    Real dev_score = Real(-1);  // best dev metric at checkpoint time
    std::uint64_t best_epoch = 0;

    Encoder encoder() const { return Encoder(config.encoder, enc); }
    std::uint64_t param_hash() const { return store.value_hash(); }
};

ParserModel init_model(const ModelConfig& cfg, const Vocabulary& vocab, Rng& rng,
                       const PretrainedVectors* pretrained = nullptr);

/// Dependent/head feature rows for one sentence, dropout off.
struct SentenceFeatures {
    Tensor h_dep;   // (T+1) x d
    Tensor h_head;  // (T+1) x d
};

SentenceFeatures encode_sentence(const ParserModel& m, const Sentence& s);

/// Gold (head, dep) pairs of a sentence, in token order.
EdgePairs gold_pairs(const Sentence& s);

struct PrecomputeResult {
    SupportSummary summary;
    ExplainIndex index;
};

/// Encodes every sentence once and folds the gold-edge representations into
/// the fast-mode sums (unit-normalized first when kind = cos) and, when
/// build_index is set, the explainable-mode index. Sentences are encoded in
/// parallel; the reduction is sequential in sentence order.
PrecomputeResult precompute_support(const ParserModel& m, const Treebank& tb, Similarity kind,
                                    size_t n_threads = 1, bool build_index = true);

}  // namespace edgekit

#endif
