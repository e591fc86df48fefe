#include "edgekit/training.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>

namespace edgekit {

std::vector<size_t> epoch_query_order(size_t n_sentences, Rng& rng) {
    std::vector<size_t> order(n_sentences);
    std::iota(order.begin(), order.end(), size_t(0));
    rng.shuffle(order.begin(), order.end());
    return order;
}

std::vector<size_t> sample_support_sentences(size_t n_sentences, size_t m, Rng& rng) {
    require(n_sentences >= 1, "no sentences to sample supports from");
    if (m >= n_sentences) {
        std::vector<size_t> all(n_sentences);
        std::iota(all.begin(), all.end(), size_t(0));
        return all;
    }
    // partial Fisher-Yates: first m slots of a virtual shuffle
    std::vector<size_t> pool(n_sentences);
    std::iota(pool.begin(), pool.end(), size_t(0));
    std::vector<size_t> out(m);
    for (size_t i = 0; i < m; ++i) {
        size_t j = i + rng.index(n_sentences - i);
        std::swap(pool[i], pool[j]);
        out[i] = pool[i];
    }
    return out;
}

std::vector<std::vector<GoldEdgeRef>> edges_by_label(const Treebank& tb, const Vocabulary& v) {
    std::vector<std::vector<GoldEdgeRef>> buckets(v.label_count());
    for (size_t si = 0; si < tb.sentences.size(); ++si) {
        const auto& toks = tb.sentences[si].tokens;
        for (size_t p = 0; p < toks.size(); ++p)
            buckets[v.label_id(toks[p].deprel)].push_back(GoldEdgeRef{si, p});
    }
    return buckets;
}

std::vector<std::vector<GoldEdgeRef>> sample_label_supports(
    const std::vector<std::vector<GoldEdgeRef>>& buckets, size_t u, Rng& rng) {
    std::vector<std::vector<GoldEdgeRef>> out(buckets.size());
    for (size_t r = 0; r < buckets.size(); ++r) {
        const auto& bucket = buckets[r];
        if (bucket.empty()) continue;
        for (size_t k = 0; k < u; ++k) out[r].push_back(bucket[rng.index(bucket.size())]);
    }
    return out;
}

namespace {

std::vector<size_t> gold_head_targets(const Sentence& s) {
    std::vector<size_t> targets;
    targets.reserve(s.length());
    for (const auto& tok : s.tokens) {
        require(tok.has_head(), "training sentence has a token without a gold head");
        targets.push_back(static_cast<size_t>(tok.head));
    }
    return targets;
}

Var head_batch_loss(Tape& tape, ParserModel& m, const Treebank& tb,
                    const std::vector<size_t>& query_ids,
                    const std::vector<size_t>& support_ids, Rng& rng) {
    const ScoringConfig& sc = m.config.scoring;
    Encoder enc = m.encoder();
    Var comp = tape.leaf(*m.edge.comp);

    Var target;
    if (sc.mode == Scoring::weight) {
        Var w = tape.leaf(*m.edge.w_head);
        target = sc.kind == Similarity::cos ? tape.l2_normalize(w) : w;
    } else {
        std::vector<Var> parts;
        parts.reserve(support_ids.size());
        for (size_t sid : support_ids) {
            const Sentence& s = tb.sentences[sid];
            TokenFeatures f = enc.run(tape, s, m.vocab, /*train=*/true, rng);
            parts.push_back(edge_reps_t(tape, f.h_dep, f.h_head, gold_pairs(s), comp));
        }
        Var all = tape.concat_rows(parts);
        if (sc.kind == Similarity::cos) all = tape.l2_normalize(all);
        target = tape.sum_rows(all);
    }

    Var loss;
    bool first = true;
    for (size_t qid : query_ids) {
        const Sentence& s = tb.sentences[qid];
        const size_t T = s.length();
        if (T == 0) continue;
        TokenFeatures f = enc.run(tape, s, m.vocab, /*train=*/true, rng);
        Var reps =
            edge_reps_t(tape, f.h_dep, f.h_head, grid_pairs(T), comp, /*allow_self=*/true);
        Var logits = tape.reshape(similarity_logits_t(tape, reps, target, sc.kind, sc.tau), T,
                                  T + 1);
        Var nll = tape.cross_entropy_masked(logits, grid_self_mask(T), gold_head_targets(s));
        loss = first ? nll : tape.add(loss, nll);
        first = false;
    }
    require(!first, "head loss over an empty query batch");
    return loss;
}

Var label_batch_loss(Tape& tape, ParserModel& m, const Treebank& tb,
                     const std::vector<size_t>& query_ids,
                     const std::vector<std::vector<GoldEdgeRef>>& supports, Rng& rng) {
    const ScoringConfig& sc = m.config.scoring;
    const size_t n_labels = m.vocab.label_count();
    Encoder enc = m.encoder();
    Var comp = tape.leaf(*m.edge.comp);

    // compact label row p <-> vocab label id; weight mode always covers R
    std::vector<size_t> present;
    std::vector<int> row_of(n_labels, -1);
    Var targets;
    if (sc.mode == Scoring::weight) {
        present.resize(n_labels);
        std::iota(present.begin(), present.end(), size_t(0));
        for (size_t r = 0; r < n_labels; ++r) row_of[r] = static_cast<int>(r);
        Var w = tape.leaf(*m.edge.w_label);
        targets = sc.kind == Similarity::cos ? tape.l2_normalize(w) : w;
    } else {
        // encode each distinct support sentence once
        std::map<size_t, TokenFeatures> features;
        for (const auto& bucket : supports)
            for (const auto& ref : bucket)
                if (!features.count(ref.sentence_id))
                    features.emplace(ref.sentence_id,
                                     enc.run(tape, tb.sentences[ref.sentence_id], m.vocab,
                                             /*train=*/true, rng));
        std::vector<Var> rows;
        for (size_t r = 0; r < n_labels; ++r) {
            if (supports[r].empty()) continue;
            std::vector<Var> reps;
            for (const auto& ref : supports[r]) {
                const Token& tok = tb.sentences[ref.sentence_id].tokens[ref.token_pos];
                const TokenFeatures& f = features.at(ref.sentence_id);
                EdgePairs pair{{static_cast<size_t>(tok.head),
                                static_cast<size_t>(tok.index)}};
                reps.push_back(edge_reps_t(tape, f.h_dep, f.h_head, pair, comp));
            }
            Var stacked = reps.size() == 1 ? reps[0] : tape.concat_rows(reps);
            if (sc.kind == Similarity::cos) stacked = tape.l2_normalize(stacked);
            rows.push_back(tape.value(stacked).n_rows == 1 ? stacked : tape.sum_rows(stacked));
            row_of[r] = static_cast<int>(present.size());
            present.push_back(r);
        }
        require(!rows.empty(), "label loss with no support edges for any label");
        targets = rows.size() == 1 ? rows[0] : tape.concat_rows(rows);
    }

    Var loss;
    bool first = true;
    for (size_t qid : query_ids) {
        const Sentence& s = tb.sentences[qid];
        if (s.length() == 0) continue;
        EdgePairs pairs;
        std::vector<size_t> gold_rows;
        for (const auto& tok : s.tokens) {
            int row = row_of[m.vocab.label_id(tok.deprel)];
            if (row < 0) continue;  // label had no support this step
            pairs.emplace_back(static_cast<size_t>(tok.head), static_cast<size_t>(tok.index));
            gold_rows.push_back(static_cast<size_t>(row));
        }
        if (pairs.empty()) continue;
        TokenFeatures f = enc.run(tape, s, m.vocab, /*train=*/true, rng);
        Var reps = edge_reps_t(tape, f.h_dep, f.h_head, pairs, comp);
        Var logits = similarity_logits_t(tape, reps, targets, sc.kind, sc.tau);
        Var nll = tape.cross_entropy_masked(
            logits, std::vector<std::uint8_t>(pairs.size() * present.size(), 1), gold_rows);
        loss = first ? nll : tape.add(loss, nll);
        first = false;
    }
    require(!first, "label loss over an empty query batch");
    return loss;
}

size_t greedy_head(const Tensor& scores, size_t row, size_t self) {
    size_t best = self == 0 ? 1 : 0;
    for (size_t j = 0; j < scores.n_cols; ++j) {
        if (j == self) continue;
        if (scores.at(row, j) > scores.at(row, best)) best = j;
    }
    return best;
}

}  // namespace

Real greedy_uas(const ParserModel& m, const Treebank& dev, const Tensor& head_target) {
    const ScoringConfig& sc = m.config.scoring;
    size_t correct = 0, total = 0;
    for (const auto& s : dev.sentences) {
        const size_t T = s.length();
        if (T == 0) continue;
        SentenceFeatures f = encode_sentence(m, s);
        Tensor reps =
            edge_reps(f.h_dep, f.h_head, grid_pairs(T), m.edge.comp->value, /*allow_self=*/true);
        Tensor flat = similarity_logits(reps, head_target, sc.kind, sc.tau);
        Tensor scores(T, T + 1, std::move(flat.v));
        for (size_t i = 1; i <= T; ++i) {
            if (greedy_head(scores, i - 1, i) == static_cast<size_t>(s.token(i).head)) ++correct;
        }
        total += T;
    }
    require(total > 0, "dev treebank has no tokens");
    return Real(100) * Real(correct) / Real(total);
}

Real gold_label_accuracy(const ParserModel& m, const Treebank& dev,
                         const Tensor& label_targets) {
    const ScoringConfig& sc = m.config.scoring;
    size_t correct = 0, total = 0;
    for (const auto& s : dev.sentences) {
        if (s.length() == 0) continue;
        SentenceFeatures f = encode_sentence(m, s);
        Tensor reps = edge_reps(f.h_dep, f.h_head, gold_pairs(s), m.edge.comp->value);
        Tensor logits = similarity_logits(reps, label_targets, sc.kind, sc.tau);
        for (size_t e = 0; e < s.tokens.size(); ++e) {
            if (argmax_row(logits, e) == m.vocab.label_id(s.tokens[e].deprel)) ++correct;
        }
        total += s.tokens.size();
    }
    require(total > 0, "dev treebank has no tokens");
    return Real(100) * Real(correct) / Real(total);
}

TrainResult train(ModelConfig mcfg, const TrainConfig& tcfg, const Vocabulary& vocab,
                  const Treebank& train_tb, const Treebank& dev_tb,
                  const PretrainedVectors* pretrained,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
    require(tcfg.n_queries >= 1 && tcfg.m_supports >= 1 && tcfg.u_supports >= 1,
            "batch sizes must be at least 1");
    require(tcfg.dropout >= Real(0) && tcfg.dropout < Real(1), "dropout must be in [0,1)");
    require(tcfg.epochs >= 1, "need at least one epoch");
    require(!train_tb.sentences.empty(), "empty training treebank");
    require(!dev_tb.sentences.empty(), "empty dev treebank");
    for (const auto& label : dev_tb.labels)
        require(vocab.label_ids.count(label), "dev label '", label,
                "' does not occur in the training data");

    mcfg.encoder.dropout = tcfg.dropout;
    Rng rng(tcfg.seed);
    ParserModel model = init_model(mcfg, vocab, rng, pretrained);
    AdamState adam(model.store);

    std::vector<std::vector<GoldEdgeRef>> buckets;
    if (mcfg.task == Task::label) {
        buckets = edges_by_label(train_tb, vocab);
        for (size_t r = 0; r < buckets.size(); ++r) {
            if (buckets[r].empty())
                std::cerr << "edgekit: warning: label '" << vocab.label_name(r)
                          << "' has no training edges and is excluded from the label loss\n";
        }
    }

    TrainResult result;
    std::vector<Tensor> best_values = model.store.snapshot();
    Real best_dev = -std::numeric_limits<Real>::infinity();
    std::uint64_t best_epoch = 0;
    const size_t n_train = train_tb.sentences.size();

    for (size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
        const Real lr = lr_at_epoch(tcfg.lr0, tcfg.decay, epoch);
        std::vector<size_t> order = epoch_query_order(n_train, rng);
        Real epoch_loss = 0;
        size_t step = 0;
        for (size_t start = 0; start < n_train; start += tcfg.n_queries, ++step) {
            std::vector<size_t> query_ids(
                order.begin() + static_cast<std::ptrdiff_t>(start),
                order.begin() +
                    static_cast<std::ptrdiff_t>(std::min(start + tcfg.n_queries, n_train)));
            try {
                Tape tape;
                Var loss;
                if (mcfg.task == Task::head) {
                    std::vector<size_t> support_ids;
                    if (mcfg.scoring.mode == Scoring::instance)
                        support_ids = sample_support_sentences(n_train, tcfg.m_supports, rng);
                    loss = head_batch_loss(tape, model, train_tb, query_ids, support_ids, rng);
                } else {
                    std::vector<std::vector<GoldEdgeRef>> supports;
                    if (mcfg.scoring.mode == Scoring::instance)
                        supports = sample_label_supports(buckets, tcfg.u_supports, rng);
                    loss = label_batch_loss(tape, model, train_tb, query_ids, supports, rng);
                }
                const Real loss_value = tape.value(loss).v[0];
                require(std::isfinite(loss_value), "loss is not finite");
                epoch_loss += loss_value;
                model.store.zero_grads();
                tape.backward(loss);
                clip_by_global_norm(model.store, tcfg.clip);
                adam.step(model.store, lr);
            } catch (const Error& err) {
                fail("training aborted at epoch ", epoch + 1, ", step ", step + 1, ": ",
                     err.what());
            }
        }

        Real dev_score;
        if (mcfg.task == Task::head) {
            SupportSummary summary;
            const SupportSummary* sp = nullptr;
            if (mcfg.scoring.mode == Scoring::instance) {
                summary = precompute_support(model, train_tb, mcfg.scoring.kind, 1,
                                             /*build_index=*/false)
                              .summary;
                sp = &summary;
            }
            dev_score = greedy_uas(model, dev_tb, head_target_vector(mcfg.scoring, model.edge, sp));
        } else {
            SupportSummary summary;
            const SupportSummary* sp = nullptr;
            if (mcfg.scoring.mode == Scoring::instance) {
                summary = precompute_support(model, train_tb, mcfg.scoring.kind, 1,
                                             /*build_index=*/false)
                              .summary;
                sp = &summary;
            }
            dev_score =
                gold_label_accuracy(model, dev_tb, label_target_matrix(mcfg.scoring, model.edge, sp));
        }

        EpochRecord rec{epoch + 1, epoch_loss, dev_score, lr};
        result.log.push_back(rec);
        if (on_epoch) on_epoch(rec);
        if (dev_score > best_dev) {
            best_dev = dev_score;
            best_epoch = epoch + 1;
            best_values = model.store.snapshot();
        }
    }

    model.store.restore(best_values);
    model.dev_score = best_dev;
    model.best_epoch = best_epoch;
    result.model = std::move(model);
    return result;
}

}  // namespace edgekit
