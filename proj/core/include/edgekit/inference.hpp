#ifndef EDGEKIT_INFERENCE_HPP
#define EDGEKIT_INFERENCE_HPP

#include <optional>
#include <string>
#include <vector>

#include "edgekit/model.hpp"

namespace edgekit {

enum class ParseMode { fast, explainable };
enum class Decoder { greedy, cle };

const char* to_string(ParseMode m);
const char* to_string(Decoder d);
ParseMode parse_mode_from_string(const std::string& s);
Decoder decoder_from_string(const std::string& s);

struct ParseResult {
    std::vector<size_t> heads;        // heads[i-1] = predicted head of token i
    std::vector<std::string> labels;  // empty when no label model is loaded
    Tensor head_scores;               // T x (T+1) candidate scores when kept
    ParseMode mode = ParseMode::fast;
};

/// Maximum spanning arborescence rooted at node 0 over a (T+1) x (T+1)
/// matrix with scores[j][i] = score of arc j -> i. Column 0 (ROOT as a
/// dependent) and the diagonal are ignored. single_root forces exactly one
/// arc out of ROOT by trying each candidate and keeping the best tree.
std::vector<size_t> decode_cle(const Tensor& scores, bool single_root = false);

/// Row-wise argmax head choice, self excluded, ties toward the lower index.
std::vector<size_t> decode_greedy(const Tensor& scores_t_by_t1);

/// Edge reps for explicit pairs of one sentence, inference path (no grad).
Tensor reps_for_pairs(const ParserModel& m, const Sentence& s, const EdgePairs& pairs,
                      bool allow_self = false);

struct RationaleNeighbor {
    ExplainEntry entry;
    Real similarity = 0;
};

/// Ranked support edges behind one query edge; similarities non-increasing.
struct Rationale {
    size_t sentence_id = 0;
    size_t head_index = 0;
    size_t dep_index = 0;
    std::string head_form;
    std::string dep_form;
    std::vector<RationaleNeighbor> neighbors;
};

/// One model plus the inference-time scoring choice and its precomputed
/// artifacts. The scoring mode may differ from the training mode (weight-
/// trained models support instance inference and vice versa); the summary
/// and index must match the model's parameter hash.
struct ModelBundle {
    ParserModel model;
    ScoringConfig scoring;  // inference-time scoring
    std::optional<SupportSummary> summary;
    std::optional<ExplainIndex> index;
};

/// Parsing front end over a head bundle and an optional label bundle.
/// Fast and explainable modes produce identical predictions; explainable
/// additionally supports rationale retrieval.
class ParserSession {
public:
    ParserSession(ModelBundle head, std::optional<ModelBundle> label, ParseMode mode,
                  Decoder decoder = Decoder::greedy, bool single_root = false);

    /// Errors name the precompute step when the artifact for the requested
    /// mode is missing.
    void switch_mode(ParseMode mode);
    ParseMode mode() const { return mode_; }

    ParseResult parse(const Sentence& s, bool keep_scores = false) const;
    /// Copy of `in` with predicted HEAD/DEPREL; parallel over sentences,
    /// deterministic output order.
    Treebank parse_treebank(const Treebank& in, size_t n_threads = 1) const;

    /// Top-k support edges for edge (j, i) of `s` under the head model.
    Rationale explain_edge(const Sentence& s, size_t sentence_id, size_t j, size_t i,
                           size_t k) const;

    const ModelBundle& head() const { return head_; }
    const ModelBundle* label() const { return label_ ? &*label_ : nullptr; }

private:
    Tensor head_score_matrix(const Sentence& s) const;  // T x (T+1)
    void check_artifacts(ParseMode mode) const;

    ModelBundle head_;
    std::optional<ModelBundle> label_;
    ParseMode mode_;
    Decoder decoder_;
    bool single_root_;
    Tensor head_target_;    // valid in fast/weight scoring
    Tensor label_targets_;  // valid when label bundle present
};

}  // namespace edgekit

#endif
