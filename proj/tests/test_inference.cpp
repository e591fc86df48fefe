#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "edgekit/conllu.hpp"
#include "edgekit/inference.hpp"
#include "edgekit/model.hpp"
#include "edgekit/rng.hpp"
#include "edgekit/synth.hpp"
#include "edgekit/vocab.hpp"

using namespace edgekit;

namespace {

Tensor random_scores(size_t n, Rng& rng) {
    Tensor t(n, n);
    for (Real& x : t.v) x = rng.uniform(Real(-5), Real(5));
    return t;
}

struct TreeOracle {
    std::vector<size_t> heads;
    double score = -1e300;
    bool found = false;
};

bool reaches_root(const std::vector<size_t>& heads, size_t T) {
    for (size_t i = 1; i <= T; ++i) {
        size_t u = i, steps = 0;
        while (u != 0 && steps <= T) {
            u = heads[u - 1];
            ++steps;
        }
        if (u != 0) return false;
    }
    return true;
}

double tree_score_of(const Tensor& w, const std::vector<size_t>& heads) {
    double s = 0;
    for (size_t i = 1; i <= heads.size(); ++i) s += w.at(heads[i - 1], i);
    return s;
}

/// Exhaustive maximum-arborescence search: every head assignment, validity
/// by walking each node up to the root.
TreeOracle best_tree(const Tensor& w, bool single_root) {
    const size_t T = w.n_rows - 1;
    std::vector<size_t> choice(T, 0);
    TreeOracle best;
    while (true) {
        bool self_free = true;
        for (size_t i = 1; i <= T; ++i)
            if (choice[i - 1] == i) self_free = false;
        if (self_free && reaches_root(choice, T)) {
            size_t roots = 0;
            for (size_t i = 1; i <= T; ++i) roots += choice[i - 1] == 0;
            if (!single_root || roots == 1) {
                double s = tree_score_of(w, choice);
                if (s > best.score) {
                    best.score = s;
                    best.heads = choice;
                    best.found = true;
                }
            }
        }
        size_t k = 0;
        while (k < T) {
            if (++choice[k] <= T) break;
            choice[k] = 0;
            ++k;
        }
        if (k == T) break;
    }
    return best;
}

ModelConfig tiny_config(Task task, Scoring mode, Similarity kind) {
    ModelConfig mc;
    mc.encoder.word_dim = 5;
    mc.encoder.char_dim = 3;
    mc.encoder.char_filters = 3;
    mc.encoder.lstm_layers = 1;
    mc.encoder.lstm_units = 4;
    mc.encoder.proj_dim = 4;
    mc.encoder.dropout = Real(0);
    mc.scoring = ScoringConfig{mode, kind, Real(64)};
    mc.task = task;
    return mc;
}

struct Corpus {
    Treebank support;
    Treebank queries;
    Vocabulary vocab;
};

Corpus toy_corpus() {
    Rng rng(91);
    Corpus c;
    c.support = toy_grammar(15, rng);
    c.queries = toy_grammar(5, rng);
    c.vocab = build_vocab(c.support);
    return c;
}

/// Random-init instance bundle with fresh artifacts over `support`.
ModelBundle instance_bundle(const Corpus& c, Task task, Similarity kind, std::uint64_t seed) {
    Rng rng(seed);
    ParserModel m = init_model(tiny_config(task, Scoring::instance, kind), c.vocab, rng);
    PrecomputeResult pre = precompute_support(m, c.support, kind);
    ModelBundle b{std::move(m), ScoringConfig{Scoring::instance, kind, Real(64)},
                  std::move(pre.summary), std::move(pre.index)};
    return b;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("mode and decoder strings round-trip") {
    CHECK(parse_mode_from_string(to_string(ParseMode::fast)) == ParseMode::fast);
    CHECK(parse_mode_from_string(to_string(ParseMode::explainable)) == ParseMode::explainable);
    CHECK(decoder_from_string(to_string(Decoder::greedy)) == Decoder::greedy);
    CHECK(decoder_from_string(to_string(Decoder::cle)) == Decoder::cle);
    CHECK_THROWS_AS(parse_mode_from_string("slow"), Error);
    CHECK_THROWS_AS(decoder_from_string("eisner"), Error);
}

TEST_CASE("decode_greedy is a per-row argmax that skips self") {
    Rng rng(92);
    for (int trial = 0; trial < 40; ++trial) {
        const size_t T = 1 + rng.index(6);
        Tensor scores(T, T + 1);
        for (Real& x : scores.v) x = rng.uniform(Real(-3), Real(3));
        std::vector<size_t> heads = decode_greedy(scores);
        REQUIRE(heads.size() == T);
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
            CHECK(heads[i - 1] == best);
            CHECK(heads[i - 1] != i);
        }
    }

    // Ties go to the lower candidate index.
    Tensor tied{{Real(1), Real(0), Real(1)}, {Real(2), Real(2), Real(0)}};
    std::vector<size_t> h = decode_greedy(tied);
    CHECK(h[0] == 0);
    CHECK(h[1] == 0);

    CHECK_THROWS_AS(decode_greedy(Tensor(2, 2)), Error);
}

TEST_CASE("decode_cle solves the textbook cycle trap") {
    // Nodes 1 and 2 prefer each other; per-node argmax would loop. The
    // optimum enters the cycle at node 1: 0->1 (5) + 1->2 (10) = 15.
    Tensor w(3, 3);
    w.at(0, 1) = Real(5);
    w.at(0, 2) = Real(4);
    w.at(1, 2) = Real(10);
    w.at(2, 1) = Real(10);
    std::vector<size_t> heads = decode_cle(w);
    CHECK(heads == std::vector<size_t>{0, 1});
}

TEST_CASE("decode_cle matches exhaustive search on random matrices") {
    Rng rng(93);
    for (size_t T = 1; T <= 4; ++T) {
        for (int trial = 0; trial < 50; ++trial) {
            Tensor w = random_scores(T + 1, rng);
            std::vector<size_t> heads = decode_cle(w);
            REQUIRE(heads.size() == T);
            CHECK(reaches_root(heads, T));
            TreeOracle oracle = best_tree(w, false);
            REQUIRE(oracle.found);
            CHECK(tree_score_of(w, heads) == doctest::Approx(oracle.score).epsilon(1e-9));
        }
    }
}

TEST_CASE("single-root decoding forfeits score to keep one ROOT child") {
    Tensor w(3, 3);
    w.at(0, 1) = Real(10);
    w.at(0, 2) = Real(9);
    w.at(1, 2) = Real(3);
    w.at(2, 1) = Real(1);

    std::vector<size_t> multi = decode_cle(w, false);
    CHECK(multi == std::vector<size_t>{0, 0});  // both attach to ROOT, score 19

    std::vector<size_t> single = decode_cle(w, true);
    CHECK(single == std::vector<size_t>{0, 1});  // score 13 beats 0->2 + 2->1 = 10
    CHECK(tree_score_of(w, single) < tree_score_of(w, multi));

    Rng rng(94);
    for (size_t T = 2; T <= 4; ++T) {
        for (int trial = 0; trial < 30; ++trial) {
            Tensor m = random_scores(T + 1, rng);
            std::vector<size_t> heads = decode_cle(m, true);
            size_t roots = 0;
            for (size_t i = 1; i <= T; ++i) roots += heads[i - 1] == 0;
            CHECK(roots == 1);
            TreeOracle oracle = best_tree(m, true);
            REQUIRE(oracle.found);
            CHECK(tree_score_of(m, heads) == doctest::Approx(oracle.score).epsilon(1e-9));
        }
    }
}

TEST_CASE("decode_cle validates its input") {
    CHECK_THROWS_AS(decode_cle(Tensor(1, 1)), Error);   // T = 0
    CHECK_THROWS_AS(decode_cle(Tensor(3, 2)), Error);   // not square
    Tensor bad(3, 3);
    bad.at(1, 2) = std::numeric_limits<Real>::quiet_NaN();
    CHECK_THROWS_AS(decode_cle(bad), Error);
}

TEST_CASE("reps_for_pairs equals the tensor composition path") {
    Corpus c = toy_corpus();
    Rng rng(95);
    ParserModel m = init_model(tiny_config(Task::head, Scoring::weight, Similarity::dot),
                               c.vocab, rng);
    const Sentence& s = c.queries.sentences[0];
    EdgePairs pairs{{0, 1}, {2, 1}, {1, 2}};
    Tensor got = reps_for_pairs(m, s, pairs);

    SentenceFeatures f = encode_sentence(m, s);
    Tensor want = edge_reps(f.h_dep, f.h_head, pairs, m.edge.comp->value);
    REQUIRE(got.same_shape(want));
    for (size_t i = 0; i < got.size(); ++i)
        CHECK(got.v[i] == doctest::Approx(want.v[i]).epsilon(1e-12));
}

TEST_CASE("fast and explainable sessions predict identical trees") {
    Corpus c = toy_corpus();
    for (Similarity kind : {Similarity::dot, Similarity::cos}) {
        ParserSession fast(instance_bundle(c, Task::head, kind, 96), std::nullopt,
                           ParseMode::fast);
        ParserSession slow(instance_bundle(c, Task::head, kind, 96), std::nullopt,
                           ParseMode::explainable);
        for (const Sentence& s : c.queries.sentences) {
            ParseResult a = fast.parse(s, /*keep_scores=*/true);
            ParseResult b = slow.parse(s, /*keep_scores=*/true);
            CHECK(a.heads == b.heads);
            REQUIRE(a.head_scores.same_shape(b.head_scores));
            const size_t T = s.tokens.size();
            for (size_t i = 1; i <= T; ++i)
                for (size_t j = 0; j <= T; ++j) {
                    if (j == i) continue;  // self cells never enter the decoder
                    CHECK(a.head_scores.at(i - 1, j) ==
                          doctest::Approx(b.head_scores.at(i - 1, j)).epsilon(1e-6));
                }
        }
    }
}

TEST_CASE("inference scoring may differ from the training configuration") {
    Corpus c = toy_corpus();
    Rng rng(97);
    // Model trained (initialized) for instance-cos, scored with weight-dot.
    ParserModel m = init_model(tiny_config(Task::head, Scoring::instance, Similarity::cos),
                               c.vocab, rng);
    Tensor w_head = m.edge.w_head->value;
    Tensor comp = m.edge.comp->value;

    std::vector<std::vector<size_t>> manual;
    for (const Sentence& s : c.queries.sentences) {
        SentenceFeatures f = encode_sentence(m, s);
        const size_t T = s.tokens.size();
        Tensor reps = edge_reps(f.h_dep, f.h_head, grid_pairs(T), comp, true);
        Tensor flat = similarity_logits(reps, w_head, Similarity::dot, Real(64));
        manual.push_back(decode_greedy(Tensor(T, T + 1, std::move(flat.v))));
    }

    ModelBundle b{std::move(m), ScoringConfig{Scoring::weight, Similarity::dot, Real(64)},
                  std::nullopt, std::nullopt};
    ParserSession session(std::move(b), std::nullopt, ParseMode::fast);
    for (size_t q = 0; q < c.queries.sentences.size(); ++q)
        CHECK(session.parse(c.queries.sentences[q]).heads == manual[q]);
}

TEST_CASE("label predictions come from the label bundle") {
    Corpus c = toy_corpus();
    ParserSession session(instance_bundle(c, Task::head, Similarity::cos, 98),
                          instance_bundle(c, Task::label, Similarity::cos, 99),
                          ParseMode::fast);
    for (const Sentence& s : c.queries.sentences) {
        ParseResult r = session.parse(s);
        REQUIRE(r.labels.size() == s.tokens.size());
        for (const std::string& l : r.labels)
            CHECK(std::find(c.vocab.labels.begin(), c.vocab.labels.end(), l) !=
                  c.vocab.labels.end());
    }

    ParserSession headless(instance_bundle(c, Task::head, Similarity::cos, 98), std::nullopt,
                           ParseMode::fast);
    CHECK(headless.parse(c.queries.sentences[0]).labels.empty());
}

TEST_CASE("parse_treebank is parallel-safe and fills HEAD/DEPREL") {
    Corpus c = toy_corpus();
    ParserSession session(instance_bundle(c, Task::head, Similarity::dot, 100),
                          instance_bundle(c, Task::label, Similarity::dot, 101),
                          ParseMode::fast);

    Treebank serial = session.parse_treebank(c.queries, 1);
    Treebank parallel = session.parse_treebank(c.queries, 3);
    CHECK(serial == parallel);
    REQUIRE(serial.sentences.size() == c.queries.sentences.size());

    for (size_t q = 0; q < serial.sentences.size(); ++q) {
        ParseResult r = session.parse(c.queries.sentences[q]);
        const Sentence& out = serial.sentences[q];
        for (size_t i = 1; i <= out.tokens.size(); ++i) {
            CHECK(size_t(out.token(int(i)).head) == r.heads[i - 1]);
            CHECK(out.token(int(i)).deprel == r.labels[i - 1]);
        }
    }

    // Without a label model the writer leaves DEPREL unannotated.
    ParserSession heads_only(instance_bundle(c, Task::head, Similarity::dot, 100), std::nullopt,
                             ParseMode::fast);
    Treebank bare = heads_only.parse_treebank(c.queries, 2);
    CHECK_FALSE(bare.sentences[0].token(1).has_deprel());
    CHECK(bare.labels.empty());
}

TEST_CASE("single-root sessions emit exactly one ROOT child") {
    Corpus c = toy_corpus();
    ParserSession session(instance_bundle(c, Task::head, Similarity::cos, 102), std::nullopt,
                          ParseMode::fast, Decoder::cle, /*single_root=*/true);
    for (const Sentence& s : c.queries.sentences) {
        ParseResult r = session.parse(s);
        size_t roots = 0;
        for (size_t h : r.heads) roots += h == 0;
        CHECK(roots == 1);
        CHECK(reaches_root(r.heads, r.heads.size()));
    }
}

TEST_CASE("explain_edge ranks support edges by similarity") {
    Corpus c = toy_corpus();
    ParserSession session(instance_bundle(c, Task::head, Similarity::cos, 103), std::nullopt,
                          ParseMode::explainable);
    const Sentence& s = c.queries.sentences[0];

    Rationale r = session.explain_edge(s, 17, 2, 1, 5);
    CHECK(r.sentence_id == 17);
    CHECK(r.head_index == 2);
    CHECK(r.dep_index == 1);
    CHECK(r.head_form == s.token(2).form);
    CHECK(r.dep_form == s.token(1).form);
    REQUIRE(r.neighbors.size() == 5);
    for (size_t k = 1; k < r.neighbors.size(); ++k)
        CHECK(r.neighbors[k - 1].similarity >= r.neighbors[k].similarity);
    for (const RationaleNeighbor& n : r.neighbors) {
        CHECK(n.entry.sentence_id < c.support.sentences.size());
        CHECK(std::abs(n.similarity) <= Real(64) + Real(1e-9));
    }

    // ROOT-headed edges are reported with the sentinel form.
    Rationale root_edge = session.explain_edge(s, 17, 0, 1, 2);
    CHECK(root_edge.head_form == "<root>");

    // Oversized k clamps to the index size.
    Rationale all = session.explain_edge(s, 17, 2, 1, 100000);
    CHECK(all.neighbors.size() == c.support.edge_count());

    CHECK_THROWS_AS(session.explain_edge(s, 17, 1, 1, 3), Error);   // self edge
    CHECK_THROWS_AS(session.explain_edge(s, 17, 2, 99, 3), Error);  // out of range
}

TEST_CASE("artifact requirements are enforced per mode") {
    Corpus c = toy_corpus();

    // Instance bundle stripped of its summary cannot run fast mode.
    ModelBundle no_summary = instance_bundle(c, Task::head, Similarity::cos, 104);
    no_summary.summary.reset();
    CHECK_THROWS_WITH_AS(
        ParserSession(std::move(no_summary), std::nullopt, ParseMode::fast),
        doctest::Contains("edgekit precompute"), Error);

    // Stripped of the index it cannot run explainable mode.
    ModelBundle no_index = instance_bundle(c, Task::head, Similarity::cos, 104);
    no_index.index.reset();
    CHECK_THROWS_WITH_AS(
        ParserSession(std::move(no_index), std::nullopt, ParseMode::explainable),
        doctest::Contains("explain index"), Error);

    // switch_mode applies the same checks without losing the session.
    ModelBundle fast_only = instance_bundle(c, Task::head, Similarity::cos, 104);
    fast_only.index.reset();
    ParserSession session(std::move(fast_only), std::nullopt, ParseMode::fast);
    CHECK_THROWS_AS(session.switch_mode(ParseMode::explainable), Error);
    CHECK(session.mode() == ParseMode::fast);

    // Weight scoring never supports explainable mode.
    Rng rng(105);
    ParserModel wm = init_model(tiny_config(Task::head, Scoring::weight, Similarity::dot),
                                c.vocab, rng);
    ModelBundle weight{std::move(wm), ScoringConfig{Scoring::weight, Similarity::dot, Real(64)},
                       std::nullopt, std::nullopt};
    CHECK_THROWS_WITH_AS(
        ParserSession(std::move(weight), std::nullopt, ParseMode::explainable),
        doctest::Contains("instance scoring"), Error);
}

TEST_CASE("stale artifacts and task mismatches are rejected at construction") {
    Corpus c = toy_corpus();

    ModelBundle stale = instance_bundle(c, Task::head, Similarity::cos, 106);
    stale.summary->param_hash ^= 0x1;
    CHECK_THROWS_WITH_AS(ParserSession(std::move(stale), std::nullopt, ParseMode::fast),
                         doctest::Contains("stale"), Error);

    ModelBundle wrong_task = instance_bundle(c, Task::label, Similarity::cos, 107);
    CHECK_THROWS_WITH_AS(ParserSession(std::move(wrong_task), std::nullopt, ParseMode::fast),
                         doctest::Contains("label task"), Error);

    ModelBundle head_as_label = instance_bundle(c, Task::head, Similarity::cos, 108);
    ModelBundle label_ok = instance_bundle(c, Task::head, Similarity::cos, 109);
    CHECK_THROWS_AS(ParserSession(std::move(head_as_label),
                                  std::optional<ModelBundle>(std::move(label_ok)),
                                  ParseMode::fast),
                    Error);
}

TEST_CASE("zero-norm representations under cos are reported with provenance") {
    Corpus c = toy_corpus();
    Rng rng(110);
    ParserModel m = init_model(tiny_config(Task::head, Scoring::weight, Similarity::cos),
                               c.vocab, rng);
    for (Real& x : m.edge.comp->value.v) x = Real(0);  // annihilates every rep
    ModelBundle b{std::move(m), ScoringConfig{Scoring::weight, Similarity::cos, Real(64)},
                  std::nullopt, std::nullopt};
    ParserSession session(std::move(b), std::nullopt, ParseMode::fast);
    CHECK_THROWS_WITH_AS(session.parse(c.queries.sentences[0]),
                         doctest::Contains("zero-norm"), Error);
}

}  // TEST_SUITE("inference")
