#ifndef EDGEKIT_EDGE_MODEL_HPP
#define EDGEKIT_EDGE_MODEL_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "edgekit/params.hpp"
#include "edgekit/tape.hpp"
#include "edgekit/tensor.hpp"

namespace edgekit {

enum class Similarity { dot, cos };
enum class Scoring { weight, instance };
enum class Task { head, label };

const char* to_string(Similarity k);
const char* to_string(Scoring m);
const char* to_string(Task t);
Similarity similarity_from_string(const std::string& s);
Scoring scoring_from_string(const std::string& s);
Task task_from_string(const std::string& s);

struct ScoringConfig {
    Scoring mode = Scoring::instance;
    Similarity kind = Similarity::cos;
    Real tau = Real(64);
};

/// Composition matrix plus the weight-mode score vectors.
struct EdgeModelWeights {
    Parameter* comp = nullptr;     // d x d, applied as rep = (h_dep * h_head) comp^T
    Parameter* w_head = nullptr;   // 1 x d
    Parameter* w_label = nullptr;  // |R| x d, one row per label
};

EdgeModelWeights register_edge_model(ParameterStore& store, size_t d, size_t n_labels, Rng& rng);
EdgeModelWeights bind_edge_model(ParameterStore& store);

/// (head j, dep i) pairs; j indexes h_head rows, i indexes h_dep rows.
using EdgePairs = std::vector<std::pair<size_t, size_t>>;

/// Rows of W(h_dep_i * h_head_j), one per pair. Tape form for training,
/// tensor form for inference; both share the same convention. allow_self
/// admits j == i placeholder rows for rectangular candidate grids whose
/// self cells the softmax mask later zeroes out.
Var edge_reps_t(Tape& t, Var h_dep, Var h_head, const EdgePairs& pairs, Var comp,
                bool allow_self = false);
Tensor edge_reps(const Tensor& h_dep, const Tensor& h_head, const EdgePairs& pairs,
                 const Tensor& comp, bool allow_self = false);

/// Candidate grid for one sentence: (j, i) for every dependent i = 1..T and
/// candidate head j = 0..T, row-major by dependent, self pairs included.
EdgePairs grid_pairs(size_t T);
/// Mask for the T x (T+1) candidate score matrix: zero at the self column.
std::vector<std::uint8_t> grid_self_mask(size_t T);

/// Pairwise similarity between two single edge representations (1 x d).
/// cos rejects zero vectors; callers with provenance should pre-check norms.
Real similarity(const Tensor& a, const Tensor& b, Similarity kind, Real tau);

/// Similarity of every rep row against every target row -> n x targets.rows.
/// dot: reps · targets^T. cos: tau * normalize(reps) · targets^T, with the
/// rep-side norm floored at eps; target rows are used as given, so callers
/// pass unit weight vectors (weight-cos) or summed unit supports (fast cos).
Tensor similarity_logits(const Tensor& reps, const Tensor& targets, Similarity kind, Real tau);
Var similarity_logits_t(Tape& t, Var reps, Var targets, Similarity kind, Real tau);

/// Precomputed support sums for the fast mode (one model, one task's use).
/// For cos the members are unit-normalized before summing; for dot they are
/// summed raw. That is the only convention under which the summed score
/// equals the explicit sum of pairwise similarities.
struct SupportSummary {
    Similarity kind = Similarity::dot;
    std::uint64_t param_hash = 0;
    Tensor h_sum_head;  // 1 x d over all gold edges
    std::uint64_t head_count = 0;
    Tensor h_sum_label;  // |R| x d, row r over gold edges with label r
    std::vector<std::uint64_t> label_counts;
};

/// Provenance of one stored support edge.
struct ExplainEntry {
    std::uint32_t sentence_id = 0;
    std::uint16_t head_index = 0;
    std::uint16_t dep_index = 0;
    std::int32_t label_id = -1;
    std::string head_form;
    std::string dep_form;
};

/// Every support edge representation, raw, plus norms so one file serves
/// both similarity kinds.
struct ExplainIndex {
    std::uint64_t param_hash = 0;
    Tensor vectors;  // n x d
    std::vector<Real> norms;
    std::vector<ExplainEntry> entries;

    size_t size() const { return entries.size(); }
};

void check_fresh(const SupportSummary& s, std::uint64_t current_param_hash);
void check_fresh(const ExplainIndex& idx, std::uint64_t current_param_hash);

/// Per-support-edge similarities of one query rep (1 x d) against the whole
/// index; their sum is the explainable-mode score.
std::vector<Real> support_similarities(const Tensor& rep, const ExplainIndex& idx,
                                       Similarity kind, Real tau);

/// Indices of the k largest similarities, descending, ties toward the lower
/// index. k > n returns all n.
std::vector<size_t> top_k_desc(const std::vector<Real>& sims, size_t k);

/// Score vectors the inference paths dot reps against: the weight vector
/// (unit-normalized under cos) in weight mode, the support sums in instance
/// mode. Rows of the label matrix follow label ids.
Tensor head_target_vector(const ScoringConfig& sc, const EdgeModelWeights& w,
                          const SupportSummary* summary);
Tensor label_target_matrix(const ScoringConfig& sc, const EdgeModelWeights& w,
                           const SupportSummary* summary);

}  // namespace edgekit

#endif
