#include "edgekit/inference.hpp"

#include <algorithm>
#include <iostream>
#include <limits>

#include "edgekit/parallel.hpp"

namespace edgekit {

const char* to_string(ParseMode m) { return m == ParseMode::fast ? "fast" : "explainable"; }
const char* to_string(Decoder d) { return d == Decoder::greedy ? "greedy" : "cle"; }

ParseMode parse_mode_from_string(const std::string& s) {
    if (s == "fast") return ParseMode::fast;
    if (s == "explainable") return ParseMode::explainable;
    fail("unknown mode '", s, "' (expected fast or explainable)");
}

Decoder decoder_from_string(const std::string& s) {
    if (s == "greedy") return Decoder::greedy;
    if (s == "cle") return Decoder::cle;
    fail("unknown decoder '", s, "' (expected greedy or cle)");
}

namespace {

constexpr Real kNegInf = -std::numeric_limits<Real>::infinity();
constexpr size_t kNone = static_cast<size_t>(-1);

/// Recursive dense Edmonds, maximization. w[u][v] is the weight of arc
/// u -> v; the diagonal and column 0 must already be -inf. Returns the
/// best-tree parent of every node >= 1.
std::vector<size_t> edmonds(const std::vector<std::vector<Real>>& w) {
    const size_t n = w.size();
    std::vector<size_t> parent(n, 0);
    for (size_t v = 1; v < n; ++v) {
        size_t best = kNone;
        for (size_t u = 0; u < n; ++u) {
            if (u == v || w[u][v] == kNegInf) continue;
            if (best == kNone || w[u][v] > w[best][v]) best = u;
        }
        require(best != kNone, "decoder: node ", v, " has no admissible head");
        parent[v] = best;
    }

    // cycle detection over the best-incoming map
    std::vector<int> color(n, 0);
    color[0] = 2;
    std::vector<size_t> cycle;
    for (size_t start = 1; start < n && cycle.empty(); ++start) {
        if (color[start] != 0) continue;
        size_t v = start;
        std::vector<size_t> path;
        while (color[v] == 0) {
            color[v] = 1;
            path.push_back(v);
            v = parent[v];
        }
        if (color[v] == 1) {
            auto it = std::find(path.begin(), path.end(), v);
            cycle.assign(it, path.end());
        }
        for (size_t u : path) color[u] = 2;
    }
    if (cycle.empty()) return parent;

    std::vector<char> in_cycle(n, 0);
    for (size_t v : cycle) in_cycle[v] = 1;

    // contract the cycle into node c (the last new id)
    std::vector<size_t> new_id(n, kNone);
    std::vector<size_t> old_id;
    for (size_t v = 0; v < n; ++v) {
        if (!in_cycle[v]) {
            new_id[v] = old_id.size();
            old_id.push_back(v);
        }
    }
    const size_t c = old_id.size();
    const size_t m = c + 1;

    std::vector<std::vector<Real>> w2(m, std::vector<Real>(m, kNegInf));
    std::vector<size_t> enter_dep(m, kNone);   // (u -> c): original dependent realizing it
    std::vector<size_t> leave_head(m, kNone);  // (c -> v): original head realizing it
    for (size_t u = 0; u < n; ++u) {
        for (size_t v = 0; v < n; ++v) {
            if (u == v || w[u][v] == kNegInf) continue;
            if (!in_cycle[u] && !in_cycle[v]) {
                w2[new_id[u]][new_id[v]] = w[u][v];
            } else if (!in_cycle[u] && in_cycle[v]) {
                const Real adjusted = w[u][v] - w[parent[v]][v];
                if (adjusted > w2[new_id[u]][c]) {
                    w2[new_id[u]][c] = adjusted;
                    enter_dep[new_id[u]] = v;
                }
            } else if (in_cycle[u] && !in_cycle[v]) {
                if (w[u][v] > w2[c][new_id[v]]) {
                    w2[c][new_id[v]] = w[u][v];
                    leave_head[new_id[v]] = u;
                }
            }
        }
    }

    const std::vector<size_t> contracted = edmonds(w2);

    std::vector<size_t> out(n, kNone);
    for (size_t v2 = 1; v2 < m; ++v2) {
        if (v2 == c) continue;
        const size_t u2 = contracted[v2];
        out[old_id[v2]] = (u2 == c) ? leave_head[v2] : old_id[u2];
    }
    const size_t entering = contracted[c];
    const size_t vstar = enter_dep[entering];
    require(vstar != kNone, "decoder: lost the edge entering a contracted cycle");
    for (size_t v : cycle) out[v] = (v == vstar) ? old_id[entering] : parent[v];
    out[0] = 0;
    return out;
}

Real tree_score(const std::vector<std::vector<Real>>& w, const std::vector<size_t>& parent) {
    Real total = 0;
    for (size_t v = 1; v < w.size(); ++v) total += w[parent[v]][v];
    return total;
}

}  // namespace

std::vector<size_t> decode_cle(const Tensor& scores, bool single_root) {
    require(scores.n_rows == scores.n_cols && scores.n_rows >= 2,
            "decoder needs a square (T+1) x (T+1) score matrix with T >= 1, got ",
            scores.shape_str());
    const size_t n = scores.n_rows;
    std::vector<std::vector<Real>> w(n, std::vector<Real>(n, kNegInf));
    for (size_t u = 0; u < n; ++u) {
        for (size_t v = 1; v < n; ++v) {
            if (u == v) continue;
            require(std::isfinite(scores.at(u, v)), "decoder: non-finite score at (", u, ",", v,
                    ")");
            w[u][v] = scores.at(u, v);
        }
    }
    std::vector<size_t> heads;
    if (!single_root) {
        std::vector<size_t> parent = edmonds(w);
        heads.assign(parent.begin() + 1, parent.end());
        return heads;
    }
    Real best_score = kNegInf;
    for (size_t r = 1; r < n; ++r) {
        std::vector<std::vector<Real>> wr = w;
        for (size_t v = 1; v < n; ++v)
            if (v != r) wr[0][v] = kNegInf;
        std::vector<size_t> parent;
        try {
            parent = edmonds(wr);
        } catch (const Error&) {
            continue;  // no tree with this root choice
        }
        const Real s = tree_score(wr, parent);
        if (s > best_score) {
            best_score = s;
            heads.assign(parent.begin() + 1, parent.end());
        }
    }
    require(!heads.empty(), "decoder: no single-root tree exists for this score matrix");
    return heads;
}

std::vector<size_t> decode_greedy(const Tensor& scores) {
    const size_t T = scores.n_rows;
    require(scores.n_cols == T + 1, "greedy decoder wants T x (T+1) scores, got ",
            scores.shape_str());
    std::vector<size_t> heads(T);
    for (size_t i = 1; i <= T; ++i) {
        size_t best = 0;
        bool seen = false;
        for (size_t j = 0; j <= T; ++j) {
            if (j == i) continue;
            if (!seen || scores.at(i - 1, j) > scores.at(i - 1, best)) {
                best = j;
                seen = true;
            }
        }
        heads[i - 1] = best;
    }
    return heads;
}

Tensor reps_for_pairs(const ParserModel& m, const Sentence& s, const EdgePairs& pairs,
                      bool allow_self) {
    SentenceFeatures f = encode_sentence(m, s);
    return edge_reps(f.h_dep, f.h_head, pairs, m.edge.comp->value, allow_self);
}

ParserSession::ParserSession(ModelBundle head, std::optional<ModelBundle> label,
                             ParseMode mode, Decoder decoder, bool single_root)
    : head_(std::move(head)),
      label_(std::move(label)),
      mode_(mode),
      decoder_(decoder),
      single_root_(single_root) {
    require(head_.model.config.task == Task::head,
            "the head bundle holds a checkpoint trained for the ",
            to_string(head_.model.config.task), " task");
    if (head_.summary) check_fresh(*head_.summary, head_.model.param_hash());
    if (head_.index) check_fresh(*head_.index, head_.model.param_hash());
    if (head_.scoring.mode == Scoring::weight || head_.summary)
        head_target_ = head_target_vector(head_.scoring, head_.model.edge,
                                          head_.summary ? &*head_.summary : nullptr);
    if (label_) {
        require(label_->model.config.task == Task::label,
                "the label bundle holds a checkpoint trained for the ",
                to_string(label_->model.config.task), " task");
        if (label_->summary) check_fresh(*label_->summary, label_->model.param_hash());
        if (label_->index) check_fresh(*label_->index, label_->model.param_hash());
        if (label_->scoring.mode == Scoring::weight || label_->summary)
            label_targets_ = label_target_matrix(label_->scoring, label_->model.edge,
                                                 label_->summary ? &*label_->summary : nullptr);
    }
    check_artifacts(mode_);
}

void ParserSession::check_artifacts(ParseMode mode) const {
    auto check_bundle = [&](const ModelBundle& b, const char* which) {
        if (b.scoring.mode == Scoring::weight) {
            require(mode == ParseMode::fast, "explainable mode needs instance scoring; the ",
                    which, " bundle scores with weights");
            return;
        }
        if (mode == ParseMode::fast)
            require(b.summary.has_value(), "fast mode needs a support summary for the ", which,
                    " model; run 'edgekit precompute' on its checkpoint");
        else
            require(b.index.has_value(), "explainable mode needs an explain index for the ",
                    which, " model; run 'edgekit precompute' on its checkpoint");
    };
    check_bundle(head_, "head");
    if (label_) check_bundle(*label_, "label");
}

void ParserSession::switch_mode(ParseMode mode) {
    check_artifacts(mode);
    mode_ = mode;
}

Tensor ParserSession::head_score_matrix(const Sentence& s) const {
    const size_t T = s.length();
    const ScoringConfig& sc = head_.scoring;
    SentenceFeatures f = encode_sentence(head_.model, s);
    EdgePairs pairs = grid_pairs(T);
    Tensor reps = edge_reps(f.h_dep, f.h_head, pairs, head_.model.edge.comp->value,
                            /*allow_self=*/true);
    if (sc.kind == Similarity::cos) {
        for (size_t p = 0; p < pairs.size(); ++p) {
            const auto& [j, i] = pairs[p];
            if (j == i) continue;
            require(l2_norm(reps.row_ptr(p), reps.n_cols) > Real(0),
                    "zero-norm edge representation under cos (dependent ", i, " '",
                    s.token(i).form, "', candidate head ", j, ")");
        }
    }
    if (mode_ == ParseMode::fast || sc.mode == Scoring::weight) {
        Tensor flat = similarity_logits(reps, head_target_, sc.kind, sc.tau);
        return Tensor(T, T + 1, std::move(flat.v));
    }
    // explainable: explicit sum of similarities to every support edge
    Tensor scores(T, T + 1);
    for (size_t p = 0; p < pairs.size(); ++p) {
        const auto& [j, i] = pairs[p];
        if (j == i) continue;  // masked later; skip the degenerate cell
        Tensor rep(1, reps.n_cols,
                   std::vector<Real>(reps.row_ptr(p), reps.row_ptr(p) + reps.n_cols));
        const std::vector<Real> sims =
            support_similarities(rep, *head_.index, sc.kind, sc.tau);
        Real total = 0;
        for (Real x : sims) total += x;
        scores.at(i - 1, j) = total;
    }
    return scores;
}

ParseResult ParserSession::parse(const Sentence& s, bool keep_scores) const {
    ParseResult out;
    out.mode = mode_;
    const size_t T = s.length();
    if (T == 0) return out;

    Tensor scores = head_score_matrix(s);
    if (decoder_ == Decoder::greedy) {
        out.heads = decode_greedy(scores);
    } else {
        Tensor square(T + 1, T + 1);
        for (auto& x : square.v) x = kNegInf;
        for (size_t i = 1; i <= T; ++i)
            for (size_t j = 0; j <= T; ++j)
                if (j != i) square.at(j, i) = scores.at(i - 1, j);
        out.heads = decode_cle(square, single_root_);
    }
    if (keep_scores) out.head_scores = scores;

    if (label_) {
        const ModelBundle& lb = *label_;
        EdgePairs pairs;
        pairs.reserve(T);
        for (size_t i = 1; i <= T; ++i) pairs.emplace_back(out.heads[i - 1], i);
        Tensor reps = reps_for_pairs(lb.model, s, pairs);
        if (lb.scoring.kind == Similarity::cos) {
            for (size_t p = 0; p < pairs.size(); ++p)
                require(l2_norm(reps.row_ptr(p), reps.n_cols) > Real(0),
                        "zero-norm edge representation under cos (dependent ", p + 1, " '",
                        s.token(p + 1).form, "', predicted head ", out.heads[p], ")");
        }
        Tensor logits;
        if (mode_ == ParseMode::fast || lb.scoring.mode == Scoring::weight) {
            logits = similarity_logits(reps, label_targets_, lb.scoring.kind, lb.scoring.tau);
        } else {
            // explainable: per-label sums of pairwise similarities
            const size_t n_labels = lb.model.vocab.label_count();
            logits = Tensor(T, n_labels);
            for (size_t p = 0; p < pairs.size(); ++p) {
                Tensor rep(1, reps.n_cols,
                           std::vector<Real>(reps.row_ptr(p), reps.row_ptr(p) + reps.n_cols));
                const std::vector<Real> sims =
                    support_similarities(rep, *lb.index, lb.scoring.kind, lb.scoring.tau);
                for (size_t e = 0; e < sims.size(); ++e) {
                    const std::int32_t r = lb.index->entries[e].label_id;
                    require(r >= 0 && static_cast<size_t>(r) < n_labels,
                            "explain index entry ", e, " has label id ", r,
                            " outside the label set");
                    logits.at(p, static_cast<size_t>(r)) += sims[e];
                }
            }
        }
        out.labels.resize(T);
        for (size_t i = 1; i <= T; ++i)
            out.labels[i - 1] = lb.model.vocab.label_name(argmax_row(logits, i - 1));
    }
    return out;
}

Treebank ParserSession::parse_treebank(const Treebank& in, size_t n_threads) const {
    std::vector<ParseResult> results(in.sentences.size());
    parallel_for(in.sentences.size(), n_threads,
                 [&](size_t i) { results[i] = parse(in.sentences[i]); });
    Treebank out = in;
    for (size_t si = 0; si < out.sentences.size(); ++si) {
        Sentence& s = out.sentences[si];
        for (size_t i = 1; i <= s.tokens.size(); ++i) {
            Token& tok = s.tokens[i - 1];
            tok.head = static_cast<int>(results[si].heads[i - 1]);
            tok.deprel = results[si].labels.empty() ? "_" : results[si].labels[i - 1];
        }
    }
    out.labels.clear();
    for (const auto& s : out.sentences)
        for (const auto& tok : s.tokens)
            if (tok.deprel != "_" &&
                std::find(out.labels.begin(), out.labels.end(), tok.deprel) == out.labels.end())
                out.labels.push_back(tok.deprel);
    return out;
}

Rationale ParserSession::explain_edge(const Sentence& s, size_t sentence_id, size_t j, size_t i,
                                      size_t k) const {
    require(head_.index.has_value(),
            "rationale retrieval needs an explain index; run 'edgekit precompute' on the head "
            "checkpoint");
    require(i >= 1 && i <= s.tokens.size() && j <= s.tokens.size() && i != j, "edge (head ", j,
            ", dep ", i, ") invalid for a sentence of length ", s.length());
    const ExplainIndex& idx = *head_.index;
    if (k > idx.size())
        std::cerr << "edgekit: warning: asked for top-" << k << " of " << idx.size()
                  << " support edges; returning all\n";
    Tensor rep = reps_for_pairs(head_.model, s, EdgePairs{{j, i}});
    const std::vector<Real> sims =
        support_similarities(rep, idx, head_.scoring.kind, head_.scoring.tau);
    Rationale r;
    r.sentence_id = sentence_id;
    r.head_index = j;
    r.dep_index = i;
    r.head_form = j == 0 ? "<root>" : s.token(j).form;
    r.dep_form = s.token(i).form;
    for (size_t id : top_k_desc(sims, k))
        r.neighbors.push_back(RationaleNeighbor{idx.entries[id], sims[id]});
    return r;
}

}  // namespace edgekit
