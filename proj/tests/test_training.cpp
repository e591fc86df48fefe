#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "edgekit/conllu.hpp"
#include "edgekit/edge_model.hpp"
#include "edgekit/model.hpp"
#include "edgekit/rng.hpp"
#include "edgekit/synth.hpp"
#include "edgekit/tape.hpp"
#include "edgekit/training.hpp"
#include "edgekit/vocab.hpp"
#include "fd_check.hpp"

using namespace edgekit;
using edgekit_tests::fd_check_store;

namespace {

ModelConfig tiny_model_config(Task task, Scoring mode, Similarity kind) {
    ModelConfig mc;
    mc.encoder.word_dim = 6;
    mc.encoder.char_dim = 4;
    mc.encoder.char_filters = 4;
    mc.encoder.lstm_layers = 1;
    mc.encoder.lstm_units = 6;
    mc.encoder.proj_dim = 5;
    mc.encoder.dropout = Real(0);
    mc.scoring = ScoringConfig{mode, kind, Real(64)};
    mc.task = task;
    return mc;
}

TrainConfig quick_train_config(size_t epochs) {
    TrainConfig tc;
    tc.n_queries = 4;
    tc.m_supports = 3;
    tc.u_supports = 1;
    tc.epochs = epochs;
    tc.dropout = Real(0);
    tc.seed = 7;
    return tc;
}

/// Masked cross-entropy computed directly from logits via log-sum-exp.
Real manual_masked_ce(const Tensor& logits, const std::vector<std::uint8_t>& mask,
                      const std::vector<size_t>& targets) {
    Real loss = 0;
    for (size_t r = 0; r < logits.n_rows; ++r) {
        Real mx = -std::numeric_limits<Real>::infinity();
        for (size_t c = 0; c < logits.n_cols; ++c)
            if (mask[r * logits.n_cols + c]) mx = std::max(mx, logits.at(r, c));
        Real z = 0;
        for (size_t c = 0; c < logits.n_cols; ++c)
            if (mask[r * logits.n_cols + c]) z += std::exp(logits.at(r, c) - mx);
        loss += mx + std::log(z) - logits.at(r, targets[r]);
    }
    return loss;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("epoch_query_order is a uniform permutation") {
    Rng rng(71);
    std::vector<size_t> order = epoch_query_order(6, rng);
    std::vector<size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<size_t>{0, 1, 2, 3, 4, 5});

    // Position-0 distribution over many shuffles: each value expected 1000,
    // sd ~ 29, so +-150 is a > 5 sigma acceptance band with a fixed seed.
    std::vector<size_t> first_counts(6, 0);
    for (int trial = 0; trial < 6000; ++trial) ++first_counts[epoch_query_order(6, rng)[0]];
    for (size_t v = 0; v < 6; ++v) {
        CHECK(first_counts[v] > 850);
        CHECK(first_counts[v] < 1150);
    }
}

TEST_CASE("sample_support_sentences draws distinct in-range ids") {
    Rng rng(72);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<size_t> ids = sample_support_sentences(10, 4, rng);
        REQUIRE(ids.size() == 4);
        std::vector<size_t> sorted = ids;
        std::sort(sorted.begin(), sorted.end());
        CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
        CHECK(sorted.back() < 10);
    }

    // m >= n returns everything, in index order.
    CHECK(sample_support_sentences(3, 5, rng) == std::vector<size_t>{0, 1, 2});
    CHECK_THROWS_AS(sample_support_sentences(0, 1, rng), Error);

    // Membership is close to uniform: each id should appear in about
    // 200 * 4 / 10 = 80 samples.
    std::vector<size_t> hits(10, 0);
    for (int trial = 0; trial < 200; ++trial)
        for (size_t id : sample_support_sentences(10, 4, rng)) ++hits[id];
    for (size_t v = 0; v < 10; ++v) {
        CHECK(hits[v] > 40);
        CHECK(hits[v] < 120);
    }
}

TEST_CASE("edges_by_label buckets every gold edge under its label") {
    Rng rng(73);
    Treebank tb = toy_grammar(25, rng);
    Vocabulary v = build_vocab(tb);
    auto buckets = edges_by_label(tb, v);
    REQUIRE(buckets.size() == v.label_count());

    size_t total = 0;
    for (size_t r = 0; r < buckets.size(); ++r) {
        for (const GoldEdgeRef& ref : buckets[r]) {
            const Token& tok = tb.sentences[ref.sentence_id].tokens[ref.token_pos];
            CHECK(v.label_id(tok.deprel) == r);
        }
        total += buckets[r].size();
    }
    CHECK(total == tb.edge_count());

    Rng srng(74);
    auto sampled = sample_label_supports(buckets, 2, srng);
    for (size_t r = 0; r < buckets.size(); ++r) {
        if (buckets[r].empty()) {
            CHECK(sampled[r].empty());
        } else {
            REQUIRE(sampled[r].size() == 2);
            for (const GoldEdgeRef& ref : sampled[r]) {
                const Token& tok = tb.sentences[ref.sentence_id].tokens[ref.token_pos];
                CHECK(v.label_id(tok.deprel) == r);
            }
        }
    }
}

TEST_CASE("first-epoch loss at lr 0 equals a direct per-sentence computation") {
    Rng rng(75);
    Treebank train_tb = toy_grammar(12, rng);
    Treebank dev_tb = toy_grammar(4, rng);
    Vocabulary vocab = build_vocab(train_tb);

    for (Similarity kind : {Similarity::dot, Similarity::cos}) {
        ModelConfig mc = tiny_model_config(Task::head, Scoring::weight, kind);
        TrainConfig tc = quick_train_config(1);
        tc.lr0 = Real(0);  // parameters never move, so epoch 1 sums a fixed loss
        TrainResult res = train(mc, tc, vocab, train_tb, dev_tb);
        REQUIRE(res.log.size() == 1);

        // Same initialization: train() seeds its rng with tc.seed.
        Rng init_rng(tc.seed);
        ParserModel model = init_model(mc, vocab, init_rng);
        Tensor target = head_target_vector(mc.scoring, model.edge, nullptr);

        Real expect = 0;
        for (const Sentence& s : train_tb.sentences) {
            const size_t T = s.length();
            SentenceFeatures f = encode_sentence(model, s);
            Tensor reps = edge_reps(f.h_dep, f.h_head, grid_pairs(T), model.edge.comp->value,
                                    /*allow_self=*/true);
            Tensor flat = similarity_logits(reps, target, kind, mc.scoring.tau);
            Tensor logits(T, T + 1, std::move(flat.v));
            std::vector<size_t> gold;
            for (const Token& tok : s.tokens) gold.push_back(size_t(tok.head));
            expect += manual_masked_ce(logits, grid_self_mask(T), gold);
        }
        CHECK(res.log[0].loss == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("label-task first-epoch loss matches the weight-mode oracle") {
    Rng rng(76);
    Treebank train_tb = toy_grammar(10, rng);
    Treebank dev_tb = toy_grammar(3, rng);
    Vocabulary vocab = build_vocab(train_tb);

    ModelConfig mc = tiny_model_config(Task::label, Scoring::weight, Similarity::cos);
    TrainConfig tc = quick_train_config(1);
    tc.lr0 = Real(0);
    TrainResult res = train(mc, tc, vocab, train_tb, dev_tb);

    Rng init_rng(tc.seed);
    ParserModel model = init_model(mc, vocab, init_rng);
    Tensor targets = label_target_matrix(mc.scoring, model.edge, nullptr);

    Real expect = 0;
    for (const Sentence& s : train_tb.sentences) {
        SentenceFeatures f = encode_sentence(model, s);
        Tensor reps = edge_reps(f.h_dep, f.h_head, gold_pairs(s), model.edge.comp->value);
        Tensor logits = similarity_logits(reps, targets, mc.scoring.kind, mc.scoring.tau);
        std::vector<size_t> gold;
        for (const Token& tok : s.tokens) gold.push_back(vocab.label_id(tok.deprel));
        expect += manual_masked_ce(logits, std::vector<std::uint8_t>(logits.size(), 1), gold);
    }
    CHECK(res.log[0].loss == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("the epoch log follows the learning-rate schedule") {
    Rng rng(77);
    Treebank train_tb = toy_grammar(8, rng);
    Treebank dev_tb = toy_grammar(3, rng);
    Vocabulary vocab = build_vocab(train_tb);

    ModelConfig mc = tiny_model_config(Task::head, Scoring::weight, Similarity::dot);
    TrainConfig tc = quick_train_config(3);
    tc.lr0 = Real(0.01);
    tc.decay = Real(0.5);
    TrainResult res = train(mc, tc, vocab, train_tb, dev_tb);

    REQUIRE(res.log.size() == 3);
    for (size_t e = 0; e < 3; ++e) {
        CHECK(res.log[e].epoch == e + 1);
        CHECK(res.log[e].lr == doctest::Approx(0.01 / (1.0 + 0.5 * double(e))).epsilon(1e-12));
        CHECK(std::isfinite(res.log[e].loss));
        CHECK(res.log[e].dev_score >= Real(0));
        CHECK(res.log[e].dev_score <= Real(100));
    }

    // Best-dev snapshotting: the returned model carries the max dev score
    // and the first epoch that reached it.
    Real best = res.log[0].dev_score;
    size_t best_epoch = 1;
    for (const EpochRecord& r : res.log) {
        if (r.dev_score > best) {
            best = r.dev_score;
            best_epoch = r.epoch;
        }
    }
    CHECK(res.model.dev_score == best);
    CHECK(res.model.best_epoch == best_epoch);
}

TEST_CASE("training is bit-reproducible per seed") {
    Rng rng(78);
    Treebank train_tb = toy_grammar(8, rng);
    Treebank dev_tb = toy_grammar(3, rng);
    Vocabulary vocab = build_vocab(train_tb);
    ModelConfig mc = tiny_model_config(Task::head, Scoring::instance, Similarity::cos);
    TrainConfig tc = quick_train_config(2);

    TrainResult a = train(mc, tc, vocab, train_tb, dev_tb);
    TrainResult b = train(mc, tc, vocab, train_tb, dev_tb);
    CHECK(a.model.param_hash() == b.model.param_hash());
    REQUIRE(a.log.size() == b.log.size());
    for (size_t e = 0; e < a.log.size(); ++e) {
        CHECK(a.log[e].loss == b.log[e].loss);
        CHECK(a.log[e].dev_score == b.log[e].dev_score);
    }

    TrainConfig other = tc;
    other.seed = 99;
    TrainResult c = train(mc, other, vocab, train_tb, dev_tb);
    CHECK(c.model.param_hash() != a.model.param_hash());
}

TEST_CASE("invalid configurations are rejected up front") {
    Rng rng(79);
    Treebank train_tb = toy_grammar(5, rng);
    Treebank dev_tb = toy_grammar(2, rng);
    Vocabulary vocab = build_vocab(train_tb);
    ModelConfig mc = tiny_model_config(Task::head, Scoring::weight, Similarity::dot);

    TrainConfig tc = quick_train_config(1);
    CHECK_THROWS_AS(train(mc, tc, vocab, Treebank{}, dev_tb), Error);
    CHECK_THROWS_AS(train(mc, tc, vocab, train_tb, Treebank{}), Error);

    TrainConfig bad_drop = tc;
    bad_drop.dropout = Real(1);
    CHECK_THROWS_AS(train(mc, bad_drop, vocab, train_tb, dev_tb), Error);

    TrainConfig no_epochs = tc;
    no_epochs.epochs = 0;
    CHECK_THROWS_AS(train(mc, no_epochs, vocab, train_tb, dev_tb), Error);

    TrainConfig no_queries = tc;
    no_queries.n_queries = 0;
    CHECK_THROWS_AS(train(mc, no_queries, vocab, train_tb, dev_tb), Error);

    // A dev label unseen in training cannot be scored.
    Treebank odd_dev = parse_conllu("1\tword\t_\t_\t_\t_\t0\tweird-label\t_\t_\n");
    CHECK_THROWS_WITH_AS(train(mc, tc, vocab, train_tb, odd_dev),
                         doctest::Contains("does not occur"), Error);
}

TEST_CASE("a diverging run aborts with epoch and step context") {
    Rng rng(80);
    Treebank train_tb = toy_grammar(8, rng);
    Treebank dev_tb = toy_grammar(2, rng);
    Vocabulary vocab = build_vocab(train_tb);

    ModelConfig mc = tiny_model_config(Task::head, Scoring::weight, Similarity::dot);
    TrainConfig tc = quick_train_config(1);
    tc.n_queries = 4;                                      // two steps per epoch
    tc.lr0 = std::numeric_limits<Real>::infinity();        // first step destroys the weights
    CHECK_THROWS_WITH_AS(train(mc, tc, vocab, train_tb, dev_tb),
                         doctest::Contains("aborted at epoch"), Error);
}

TEST_CASE("instance-mode training improves the toy dev score") {
    Rng rng(81);
    Treebank train_tb = toy_grammar(40, rng);
    Treebank dev_tb = toy_grammar(10, rng);
    Vocabulary vocab = build_vocab(train_tb);

    ModelConfig mc = tiny_model_config(Task::head, Scoring::instance, Similarity::cos);
    mc.encoder.proj_dim = 8;
    mc.encoder.lstm_units = 8;
    TrainConfig tc = quick_train_config(8);
    tc.n_queries = 8;
    tc.lr0 = Real(0.005);
    TrainResult res = train(mc, tc, vocab, train_tb, dev_tb);

    CHECK(res.model.dev_score > res.log.front().dev_score - Real(1e-9));
    CHECK(res.model.dev_score > Real(50));  // toy grammar is nearly deterministic
    CHECK(res.log.back().loss < res.log.front().loss);
}

TEST_CASE("the full instance-cos loss graph passes a finite-difference check") {
    Treebank tb = parse_conllu(
        "1\tma\t_\t_\t_\t_\t2\ta\t_\t_\n"
        "2\tpo\t_\t_\t_\t_\t0\tb\t_\t_\n"
        "3\tre\t_\t_\t_\t_\t2\ta\t_\t_\n\n"
        "1\tpo\t_\t_\t_\t_\t2\ta\t_\t_\n"
        "2\tma\t_\t_\t_\t_\t0\tb\t_\t_\n\n");
    Vocabulary vocab = build_vocab(tb);
    ModelConfig mc = tiny_model_config(Task::head, Scoring::instance, Similarity::cos);
    mc.encoder.word_dim = 3;
    mc.encoder.char_dim = 2;
    mc.encoder.char_filters = 2;
    mc.encoder.lstm_units = 3;
    mc.encoder.proj_dim = 3;

    Rng rng(82);
    ParserModel model = init_model(mc, vocab, rng);
    Encoder enc = model.encoder();
    const Sentence& query = tb.sentences[0];
    const Sentence& support = tb.sentences[1];
    const size_t T = query.tokens.size();
    std::vector<size_t> gold;
    for (const Token& tok : query.tokens) gold.push_back(size_t(tok.head));

    // Support sums are built on the tape, so the check covers the gradient
    // through the support encodings as well as the query side.
    auto rep = fd_check_store(model.store, [&](Tape& t) {
        Rng drng(1);
        Var comp = t.leaf(*model.edge.comp);
        TokenFeatures sf = enc.run(t, support, vocab, false, drng);
        Var sreps = edge_reps_t(t, sf.h_dep, sf.h_head, gold_pairs(support), comp);
        Var target = t.sum_rows(t.l2_normalize(sreps));

        TokenFeatures qf = enc.run(t, query, vocab, false, drng);
        Var qreps = edge_reps_t(t, qf.h_dep, qf.h_head, grid_pairs(T), comp, true);
        Var logits = t.reshape(
            similarity_logits_t(t, qreps, target, Similarity::cos, mc.scoring.tau), T, T + 1);
        return t.cross_entropy_masked(logits, grid_self_mask(T), gold);
    });
    INFO("worst entry " << rep.worst << " rel err " << rep.max_rel_err);
    CHECK(rep.max_rel_err < 1e-4);
}

}  // TEST_SUITE("training")
