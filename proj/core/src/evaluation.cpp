#include "edgekit/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "edgekit/parallel.hpp"

namespace edgekit {

namespace {

bool is_punct_form(const std::string& form) {
    if (form.empty()) return false;
    for (unsigned char c : form)
        if (c >= 0x80 || !std::ispunct(c)) return false;
    return true;
}

void check_aligned(const Treebank& pred, const Treebank& gold) {
    require(pred.sentences.size() == gold.sentences.size(),
            "treebanks disagree on sentence count: ", pred.sentences.size(), " vs ",
            gold.sentences.size());
    for (size_t si = 0; si < gold.sentences.size(); ++si) {
        const Sentence& p = pred.sentences[si];
        const Sentence& g = gold.sentences[si];
        require(p.tokens.size() == g.tokens.size(), "sentence ", si + 1,
                " disagrees on token count: ", p.tokens.size(), " vs ", g.tokens.size());
        for (size_t t = 0; t < g.tokens.size(); ++t)
            require(p.tokens[t].form == g.tokens[t].form, "sentence ", si + 1, " token ", t + 1,
                    " disagrees on form: '", p.tokens[t].form, "' vs '", g.tokens[t].form, "'");
    }
}

}  // namespace

ScoreReport attachment_scores(const Treebank& pred, const Treebank& gold, bool include_punct) {
    check_aligned(pred, gold);
    ScoreReport r;
    for (size_t si = 0; si < gold.sentences.size(); ++si) {
        const Sentence& p = pred.sentences[si];
        const Sentence& g = gold.sentences[si];
        for (size_t t = 0; t < g.tokens.size(); ++t) {
            const Token& gt = g.tokens[t];
            require(gt.has_head(), "gold sentence ", si + 1, " token ", t + 1, " has no head");
            if (!include_punct && is_punct_form(gt.form)) continue;
            ++r.total;
            const Token& pt = p.tokens[t];
            if (!pt.has_head() || pt.head != gt.head) continue;
            ++r.correct_heads;
            if (pt.deprel == gt.deprel) ++r.correct_labeled;
        }
    }
    if (r.total > 0) {
        r.uas = 100.0 * static_cast<double>(r.correct_heads) / static_cast<double>(r.total);
        r.las = 100.0 * static_cast<double>(r.correct_labeled) / static_cast<double>(r.total);
    }
    return r;
}

ScoreReport identical_subclass_test(const ParserSession& session, const Treebank& dev,
                                    size_t n_threads) {
    const ModelBundle& hb = session.head();
    require(hb.model.config.task == Task::head,
            "the subclass test needs a checkpoint trained with head supervision only, got a ",
            to_string(hb.model.config.task), "-task model");
    require(hb.index.has_value() && hb.index->size() > 0,
            "the subclass test needs a non-empty explain index; run 'edgekit precompute' on "
            "the head checkpoint");
    const ExplainIndex& idx = *hb.index;

    struct SentenceTally {
        size_t total = 0;
        size_t correct_heads = 0;
        size_t correct_labeled = 0;
    };
    std::vector<SentenceTally> tallies(dev.sentences.size());
    parallel_for(dev.sentences.size(), n_threads, [&](size_t si) {
        const Sentence& s = dev.sentences[si];
        SentenceTally& tally = tallies[si];
        tally.total = s.tokens.size();
        if (s.tokens.empty()) return;
        const ParseResult res = session.parse(s);
        EdgePairs correct;
        std::vector<size_t> correct_tokens;
        for (size_t i = 1; i <= s.tokens.size(); ++i) {
            const Token& gt = s.tokens[i - 1];
            require(gt.has_head(), "dev sentence ", si + 1, " token ", i, " has no gold head");
            if (static_cast<int>(res.heads[i - 1]) == gt.head) {
                correct.emplace_back(res.heads[i - 1], i);
                correct_tokens.push_back(i);
            }
        }
        tally.correct_heads = correct.size();
        if (correct.empty()) return;
        Tensor reps = reps_for_pairs(hb.model, s, correct);
        for (size_t p = 0; p < correct.size(); ++p) {
            Tensor rep(1, reps.n_cols,
                       std::vector<Real>(reps.row_ptr(p), reps.row_ptr(p) + reps.n_cols));
            const std::vector<Real> sims =
                support_similarities(rep, idx, hb.scoring.kind, hb.scoring.tau);
            const size_t nn = top_k_desc(sims, 1).front();
            const std::int32_t lid = idx.entries[nn].label_id;
            if (lid < 0) continue;
            const std::string& nn_label =
                hb.model.vocab.label_name(static_cast<size_t>(lid));
            if (nn_label == s.tokens[correct_tokens[p] - 1].deprel) ++tally.correct_labeled;
        }
    });

    ScoreReport r;
    for (const SentenceTally& t : tallies) {
        r.total += t.total;
        r.correct_heads += t.correct_heads;
        r.correct_labeled += t.correct_labeled;
    }
    if (r.total > 0) {
        r.uas = 100.0 * static_cast<double>(r.correct_heads) / static_cast<double>(r.total);
        r.las = 100.0 * static_cast<double>(r.correct_labeled) / static_cast<double>(r.total);
    }
    return r;
}

HubnessReport hubness(const ExplainIndex& index, const Tensor& query_reps, Similarity kind,
                      Real tau, size_t k, size_t n_threads) {
    require(index.size() > 0, "hubness needs a non-empty explain index");
    require(query_reps.n_rows > 0, "hubness needs at least one query edge");
    require(query_reps.n_cols == index.vectors.n_cols, "query reps are ", query_reps.n_cols,
            "-dimensional but the index stores ", index.vectors.n_cols, " dimensions");
    require(k > 0, "hubness needs k >= 1");

    std::vector<std::vector<size_t>> nearest(query_reps.n_rows);
    parallel_for(query_reps.n_rows, n_threads, [&](size_t q) {
        Tensor rep(1, query_reps.n_cols,
                   std::vector<Real>(query_reps.row_ptr(q),
                                     query_reps.row_ptr(q) + query_reps.n_cols));
        const std::vector<Real> sims = support_similarities(rep, index, kind, tau);
        nearest[q] = top_k_desc(sims, k);
    });

    HubnessReport r;
    r.k = k;
    r.n_queries = query_reps.n_rows;
    r.counts.assign(index.size(), 0);
    for (const auto& ids : nearest)
        for (size_t id : ids) ++r.counts[id];

    r.ranking.resize(index.size());
    for (size_t i = 0; i < r.ranking.size(); ++i) r.ranking[i] = i;
    std::stable_sort(r.ranking.begin(), r.ranking.end(),
                     [&](size_t a, size_t b) { return r.counts[a] > r.counts[b]; });
    r.max_count = r.counts[r.ranking.front()];
    std::vector<size_t> sorted = r.counts;
    std::sort(sorted.begin(), sorted.end());
    const size_t n = sorted.size();
    r.median_count = (n % 2 == 1)
                         ? static_cast<double>(sorted[n / 2])
                         : (static_cast<double>(sorted[n / 2 - 1]) +
                            static_cast<double>(sorted[n / 2])) /
                               2.0;
    return r;
}

Tensor predicted_query_reps(const ParserSession& session, const Treebank& tb,
                            size_t n_threads) {
    std::vector<Tensor> per_sentence(tb.sentences.size());
    parallel_for(tb.sentences.size(), n_threads, [&](size_t si) {
        const Sentence& s = tb.sentences[si];
        if (s.tokens.empty()) return;
        const ParseResult res = session.parse(s);
        EdgePairs pairs;
        pairs.reserve(s.tokens.size());
        for (size_t i = 1; i <= s.tokens.size(); ++i) pairs.emplace_back(res.heads[i - 1], i);
        per_sentence[si] = reps_for_pairs(session.head().model, s, pairs);
    });
    size_t rows = 0;
    size_t cols = 0;
    for (const Tensor& t : per_sentence) {
        rows += t.n_rows;
        if (t.n_cols > 0) cols = t.n_cols;
    }
    require(rows > 0, "no query edges: every sentence is empty");
    Tensor out(rows, cols);
    size_t at = 0;
    for (const Tensor& t : per_sentence) {
        std::copy(t.v.begin(), t.v.end(), out.v.begin() + at * cols);
        at += t.n_rows;
    }
    return out;
}

nlohmann::json to_json_report(const ScoreReport& r) {
    return nlohmann::json{{"uas", r.uas},
                          {"las", r.las},
                          {"total", r.total},
                          {"correct_heads", r.correct_heads},
                          {"correct_labeled", r.correct_labeled}};
}

nlohmann::json to_json_report(const HubnessReport& r, const ExplainIndex& index,
                              size_t top_m) {
    nlohmann::json top = nlohmann::json::array();
    const size_t m = std::min(top_m, r.ranking.size());
    for (size_t rank = 0; rank < m; ++rank) {
        const size_t id = r.ranking[rank];
        const ExplainEntry& e = index.entries[id];
        top.push_back({{"rank", rank + 1},
                       {"n_k", r.counts[id]},
                       {"sentence_id", e.sentence_id},
                       {"head_index", e.head_index},
                       {"dep_index", e.dep_index},
                       {"head_form", e.head_form},
                       {"dep_form", e.dep_form},
                       {"label_id", e.label_id}});
    }
    return nlohmann::json{{"k", r.k},
                          {"n_queries", r.n_queries},
                          {"n_support", r.counts.size()},
                          {"max_n_k", r.max_count},
                          {"median_n_k", r.median_count},
                          {"top", std::move(top)}};
}

void write_report_json(const std::string& path, const nlohmann::json& body) {
    nlohmann::json envelope{{"schema", "edgekit-report/1"}, {"report", body}};
    std::ofstream out(path);
    require(out.good(), "cannot write report to '", path, "'");
    out << envelope.dump(2) << "\n";
    require(out.good(), "failed while writing report to '", path, "'");
}

void write_hubness_tsv(const std::string& path, const HubnessReport& r,
                       const ExplainIndex& index, size_t top_m) {
    std::ofstream out(path);
    require(out.good(), "cannot write curve data to '", path, "'");
    out << "rank\tn_k\tsentence_id\thead_index\tdep_index\thead_form\tdep_form\n";
    const size_t m = std::min(top_m, r.ranking.size());
    for (size_t rank = 0; rank < m; ++rank) {
        const size_t id = r.ranking[rank];
        const ExplainEntry& e = index.entries[id];
        out << rank + 1 << '\t' << r.counts[id] << '\t' << e.sentence_id << '\t'
            << e.head_index << '\t' << e.dep_index << '\t' << e.head_form << '\t' << e.dep_form
            << '\n';
    }
    require(out.good(), "failed while writing curve data to '", path, "'");
}

}  // namespace edgekit
