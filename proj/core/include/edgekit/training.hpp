#ifndef EDGEKIT_TRAINING_HPP
#define EDGEKIT_TRAINING_HPP

#include <functional>
#include <vector>

#include "edgekit/model.hpp"
#include "edgekit/optim.hpp"

namespace edgekit {

struct TrainConfig {
    size_t n_queries = 32;   // query sentences per step
    size_t m_supports = 10;  // support sentences per step (head task)
    size_t u_supports = 1;   // support edges per label per step (label task)
    Real lr0 = Real(0.001);
    Real decay = Real(0.05);  // lr_t = lr0 / (1 + decay * completed_epochs)
    size_t epochs = 100;
    Real clip = Real(5.0);
    Real dropout = Real(0.3);
    std::uint64_t seed = 1;
};

struct EpochRecord {
    size_t epoch = 0;  // 1-based, completed
    Real loss = 0;     // summed batch losses over the epoch
    Real dev_score = 0;
    Real lr = 0;
};

struct TrainResult {
    ParserModel model;  // best-dev parameters
    std::vector<EpochRecord> log;
};

/// One epoch's query pass: all sentence ids, shuffled.
std::vector<size_t> epoch_query_order(size_t n_sentences, Rng& rng);

/// Uniform support draw without replacement; m >= n returns every id.
std::vector<size_t> sample_support_sentences(size_t n_sentences, size_t m, Rng& rng);

/// Position of one gold edge: sentence plus 0-based token slot.
struct GoldEdgeRef {
    size_t sentence_id = 0;
    size_t token_pos = 0;
};

/// Gold edges bucketed by label id; labels with no edges get empty buckets.
std::vector<std::vector<GoldEdgeRef>> edges_by_label(const Treebank& tb, const Vocabulary& v);

/// u edges per label, uniform within each bucket; empty buckets are skipped
/// (the caller excludes those labels from the step).
std::vector<std::vector<GoldEdgeRef>> sample_label_supports(
    const std::vector<std::vector<GoldEdgeRef>>& buckets, size_t u, Rng& rng);

/// Greedy unlabeled attachment score of the model on `dev`, scored against
/// `head_target` (weight vector or fast-mode support sum).
Real greedy_uas(const ParserModel& m, const Treebank& dev, const Tensor& head_target);

/// Label accuracy over gold dev edges against `label_targets` (one row per
/// label in vocab order).
Real gold_label_accuracy(const ParserModel& m, const Treebank& dev, const Tensor& label_targets);

/// Trains the task named by mcfg.task from a fresh initialization, keeping
/// the parameters of the best dev epoch (UAS for the head task, gold-edge
/// label accuracy for the label task). mcfg.encoder.dropout is overridden
/// by tcfg.dropout. Non-finite losses abort with step diagnostics.
TrainResult train(ModelConfig mcfg, const TrainConfig& tcfg, const Vocabulary& vocab,
                  const Treebank& train_tb, const Treebank& dev_tb,
                  const PretrainedVectors* pretrained = nullptr,
                  const std::function<void(const EpochRecord&)>& on_epoch = nullptr);

}  // namespace edgekit

#endif
