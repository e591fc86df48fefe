#include "edgekit/edge_model.hpp"

#include <algorithm>
#include <numeric>

#include "edgekit/common.hpp"

namespace edgekit {

const char* to_string(Similarity k) { return k == Similarity::dot ? "dot" : "cos"; }
const char* to_string(Scoring m) { return m == Scoring::weight ? "weight" : "instance"; }
const char* to_string(Task t) { return t == Task::head ? "head" : "label"; }

Similarity similarity_from_string(const std::string& s) {
    if (s == "dot") return Similarity::dot;
    if (s == "cos") return Similarity::cos;
    fail("unknown similarity '", s, "' (expected dot or cos)");
}

Scoring scoring_from_string(const std::string& s) {
    if (s == "weight") return Scoring::weight;
    if (s == "instance") return Scoring::instance;
    fail("unknown scoring mode '", s, "' (expected weight or instance)");
}

Task task_from_string(const std::string& s) {
    if (s == "head") return Task::head;
    if (s == "label") return Task::label;
    fail("unknown task '", s, "' (expected head or label)");
}

EdgeModelWeights register_edge_model(ParameterStore& store, size_t d, size_t n_labels, Rng& rng) {
    require(d >= 1 && n_labels >= 1, "edge model needs d >= 1 and at least one label");
    EdgeModelWeights w;
    w.comp = &store.create_glorot("edge.comp", d, d, rng);
    w.w_head = &store.create_glorot("edge.w_head", 1, d, rng);
    w.w_label = &store.create_glorot("edge.w_label", n_labels, d, rng);
    return w;
}

EdgeModelWeights bind_edge_model(ParameterStore& store) {
    EdgeModelWeights w;
    w.comp = &store.get("edge.comp");
    w.w_head = &store.get("edge.w_head");
    w.w_label = &store.get("edge.w_label");
    return w;
}

namespace {
void check_pairs(const EdgePairs& pairs, size_t n_positions, bool allow_self) {
    for (const auto& [j, i] : pairs) {
        require(j < n_positions && i >= 1 && i < n_positions && (allow_self || i != j),
                "edge (head ", j, ", dep ", i, ") invalid for sentence with ", n_positions - 1,
                " tokens");
    }
}
}  // namespace

EdgePairs grid_pairs(size_t T) {
    EdgePairs pairs;
    pairs.reserve(T * (T + 1));
    for (size_t i = 1; i <= T; ++i)
        for (size_t j = 0; j <= T; ++j) pairs.emplace_back(j, i);
    return pairs;
}

std::vector<std::uint8_t> grid_self_mask(size_t T) {
    std::vector<std::uint8_t> mask(T * (T + 1), 1);
    for (size_t i = 1; i <= T; ++i) mask[(i - 1) * (T + 1) + i] = 0;
    return mask;
}

Var edge_reps_t(Tape& t, Var h_dep, Var h_head, const EdgePairs& pairs, Var comp,
                bool allow_self) {
    check_pairs(pairs, t.value(h_dep).n_rows, allow_self);
    std::vector<size_t> dep_ids, head_ids;
    dep_ids.reserve(pairs.size());
    head_ids.reserve(pairs.size());
    for (const auto& [j, i] : pairs) {
        head_ids.push_back(j);
        dep_ids.push_back(i);
    }
    Var prod = t.mul(t.gather_rows(h_dep, dep_ids), t.gather_rows(h_head, head_ids));
    return t.matmul_nt(prod, comp);
}

Tensor edge_reps(const Tensor& h_dep, const Tensor& h_head, const EdgePairs& pairs,
                 const Tensor& comp, bool allow_self) {
    check_pairs(pairs, h_dep.n_rows, allow_self);
    std::vector<size_t> dep_ids, head_ids;
    dep_ids.reserve(pairs.size());
    head_ids.reserve(pairs.size());
    for (const auto& [j, i] : pairs) {
        head_ids.push_back(j);
        dep_ids.push_back(i);
    }
    Tensor prod = mul(gather_rows(h_dep, dep_ids), gather_rows(h_head, head_ids));
    return matmul_nt(prod, comp);
}

Real similarity(const Tensor& a, const Tensor& b, Similarity kind, Real tau) {
    require(a.n_rows == 1 && b.n_rows == 1 && a.n_cols == b.n_cols,
            "similarity needs two 1 x d vectors, got ", a.shape_str(), " and ", b.shape_str());
    if (kind == Similarity::dot) return dot(a.v.data(), b.v.data(), a.n_cols);
    Real na = l2_norm(a.v.data(), a.n_cols);
    Real nb = l2_norm(b.v.data(), b.n_cols);
    require(na > Real(0) && nb > Real(0), "cos similarity of a zero vector");
    return tau * dot(a.v.data(), b.v.data(), a.n_cols) / (na * nb);
}

Tensor similarity_logits(const Tensor& reps, const Tensor& targets, Similarity kind, Real tau) {
    if (kind == Similarity::dot) return matmul_nt(reps, targets);
    return scale(matmul_nt(l2_normalize_rows(reps), targets), tau);
}

Var similarity_logits_t(Tape& t, Var reps, Var targets, Similarity kind, Real tau) {
    if (kind == Similarity::dot) return t.matmul_nt(reps, targets);
    return t.scale(t.matmul_nt(t.l2_normalize(reps), targets), tau);
}

void check_fresh(const SupportSummary& s, std::uint64_t current_param_hash) {
    require(s.param_hash == current_param_hash,
            "support summary is stale: built for parameter hash ", hash_hex(s.param_hash),
            ", model now has ", hash_hex(current_param_hash),
            "; rerun precompute for this checkpoint");
}

void check_fresh(const ExplainIndex& idx, std::uint64_t current_param_hash) {
    require(idx.param_hash == current_param_hash,
            "explain index is stale: built for parameter hash ", hash_hex(idx.param_hash),
            ", model now has ", hash_hex(current_param_hash),
            "; rerun precompute for this checkpoint");
}

std::vector<Real> support_similarities(const Tensor& rep, const ExplainIndex& idx,
                                       Similarity kind, Real tau) {
    require(rep.n_rows == 1 && rep.n_cols == idx.vectors.n_cols,
            "query rep shape ", rep.shape_str(), " does not match index width ",
            idx.vectors.n_cols);
    const size_t n = idx.size();
    std::vector<Real> sims(n);
    if (kind == Similarity::dot) {
        for (size_t k = 0; k < n; ++k)
            sims[k] = dot(rep.v.data(), idx.vectors.row_ptr(k), rep.n_cols);
        return sims;
    }
    Real nq = l2_norm(rep.v.data(), rep.n_cols);
    require(nq > Real(0), "cos similarity of a zero query representation");
    for (size_t k = 0; k < n; ++k) {
        require(idx.norms[k] > Real(0), "explain index entry ", k,
                " has a zero-norm vector (sentence ", idx.entries[k].sentence_id, ", head ",
                idx.entries[k].head_index, ", dep ", idx.entries[k].dep_index, ")");
        sims[k] = tau * dot(rep.v.data(), idx.vectors.row_ptr(k), rep.n_cols) /
                  (nq * idx.norms[k]);
    }
    return sims;
}

std::vector<size_t> top_k_desc(const std::vector<Real>& sims, size_t k) {
    std::vector<size_t> order(sims.size());
    std::iota(order.begin(), order.end(), size_t(0));
    k = std::min(k, sims.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](size_t a, size_t b) {
                          if (sims[a] != sims[b]) return sims[a] > sims[b];
                          return a < b;
                      });
    order.resize(k);
    return order;
}

Tensor head_target_vector(const ScoringConfig& sc, const EdgeModelWeights& w,
                          const SupportSummary* summary) {
    if (sc.mode == Scoring::weight) {
        const Tensor& wv = w.w_head->value;
        return sc.kind == Similarity::cos ? l2_normalize_rows(wv) : wv;
    }
    require(summary != nullptr, "instance scoring needs a support summary; run precompute");
    require(summary->kind == sc.kind, "support summary was built for ",
            to_string(summary->kind), " similarity, asked to score with ", to_string(sc.kind),
            "; rerun precompute with the matching kind");
    require(summary->head_count > 0, "support summary has no head edges");
    return summary->h_sum_head;
}

Tensor label_target_matrix(const ScoringConfig& sc, const EdgeModelWeights& w,
                           const SupportSummary* summary) {
    if (sc.mode == Scoring::weight) {
        const Tensor& wv = w.w_label->value;
        return sc.kind == Similarity::cos ? l2_normalize_rows(wv) : wv;
    }
    require(summary != nullptr, "instance scoring needs a support summary; run precompute");
    require(summary->kind == sc.kind, "support summary was built for ",
            to_string(summary->kind), " similarity, asked to score with ", to_string(sc.kind),
            "; rerun precompute with the matching kind");
    require(summary->h_sum_label.n_rows >= 1, "support summary has no label sums");
    return summary->h_sum_label;
}

}  // namespace edgekit
