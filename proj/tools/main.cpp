/// Command-line entry point: train, precompute, parse, explain, evaluate,
/// subclass-test, hubness, synth. Settings layer as config file < EDGEKIT_*
/// environment variables < flags; --threads 1 is bit-reproducible.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include "json.hpp"

#include "edgekit/checkpoint.hpp"
#include "edgekit/evaluation.hpp"
#include "edgekit/inference.hpp"
#include "edgekit/parallel.hpp"
#include "edgekit/serde.hpp"
#include "edgekit/synth.hpp"
#include "edgekit/training.hpp"

using json = nlohmann::json;
using namespace edgekit;

namespace {

std::optional<std::string> env_value(const std::string& name) {
    const char* v = std::getenv(("EDGEKIT_" + name).c_str());
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

template <typename T>
void env_uint(const std::string& name, T& out) {
    if (auto v = env_value(name)) {
        try {
            out = static_cast<T>(std::stoull(*v));
        } catch (const std::exception&) {
            fail("EDGEKIT_", name, " is not a whole number: '", *v, "'");
        }
    }
}

void env_real(const std::string& name, Real& out) {
    if (auto v = env_value(name)) {
        try {
            out = static_cast<Real>(std::stod(*v));
        } catch (const std::exception&) {
            fail("EDGEKIT_", name, " is not a number: '", *v, "'");
        }
    }
}

void env_threads(size_t& threads) { env_uint("THREADS", threads); }

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open config file '", path, "'");
    json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    require(!j.is_discarded(), "config file '", path, "' is not valid JSON");
    return j;
}

void ensure_parent_dir(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

/// Loads a checkpoint plus its optional precompute artifacts and applies
/// inference-time scoring overrides (so a weight-trained model can be run
/// instance-based and vice versa).
ModelBundle make_bundle(const std::string& ckpt_path, const std::string& summary_path,
                        const std::string& index_path,
                        const std::optional<std::string>& scoring_override,
                        const std::optional<std::string>& similarity_override,
                        const std::optional<Real>& tau_override) {
    ModelBundle b{load_checkpoint(ckpt_path), ScoringConfig{}, std::nullopt, std::nullopt};
    b.scoring = b.model.config.scoring;
    if (scoring_override) b.scoring.mode = scoring_from_string(*scoring_override);
    if (similarity_override) b.scoring.kind = similarity_from_string(*similarity_override);
    if (tau_override) b.scoring.tau = *tau_override;
    if (!summary_path.empty()) b.summary = load_summary(summary_path);
    if (!index_path.empty()) b.index = load_explain_index(index_path);
    return b;
}

std::string label_or_null(const Vocabulary& vocab, std::int32_t label_id) {
    if (label_id < 0 || static_cast<size_t>(label_id) >= vocab.label_count()) return {};
    return vocab.label_name(static_cast<size_t>(label_id));
}

json rationale_to_json(const Rationale& r, const Vocabulary& vocab) {
    json neighbors = json::array();
    for (size_t rank = 0; rank < r.neighbors.size(); ++rank) {
        const RationaleNeighbor& n = r.neighbors[rank];
        json entry{{"rank", rank + 1},
                   {"similarity", n.similarity},
                   {"train_sentence_id", n.entry.sentence_id},
                   {"head_index", n.entry.head_index},
                   {"dep_index", n.entry.dep_index},
                   {"head_form", n.entry.head_form},
                   {"dep_form", n.entry.dep_form}};
        const std::string label = label_or_null(vocab, n.entry.label_id);
        entry["gold_label"] = label.empty() ? json(nullptr) : json(label);
        neighbors.push_back(std::move(entry));
    }
    return json{{"sentence_id", r.sentence_id},
                {"head_index", r.head_index},
                {"dep_index", r.dep_index},
                {"head_form", r.head_form},
                {"dep_form", r.dep_form},
                {"neighbors", std::move(neighbors)}};
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
    std::string train_path, dev_path, out_dir, config_path, vectors_path;
    std::optional<std::string> task, scoring, similarity;
    std::optional<Real> tau, lr0, decay, dropout, clip;
    std::optional<size_t> seed, epochs, n_queries, m_supports, u_supports;
    std::optional<size_t> word_dim, char_dim, char_window, char_filters;
    std::optional<size_t> lstm_layers, lstm_units, proj_dim;
    size_t min_freq = 1;
    size_t threads = 1;
};

int cmd_train(const TrainArgs& a) {
    ModelConfig mcfg;
    TrainConfig tcfg;

    if (!a.config_path.empty()) {
        const json j = load_json_file(a.config_path);
        if (j.contains("encoder")) from_json(j.at("encoder"), mcfg.encoder);
        if (j.contains("scoring")) from_json(j.at("scoring"), mcfg.scoring);
        if (j.contains("train")) from_json(j.at("train"), tcfg);
        if (j.contains("task")) mcfg.task = task_from_string(j.at("task").get<std::string>());
    }

    if (auto v = env_value("TASK")) mcfg.task = task_from_string(*v);
    if (auto v = env_value("SCORING")) mcfg.scoring.mode = scoring_from_string(*v);
    if (auto v = env_value("SIMILARITY")) mcfg.scoring.kind = similarity_from_string(*v);
    env_real("TAU", mcfg.scoring.tau);
    env_uint("SEED", tcfg.seed);
    env_uint("EPOCHS", tcfg.epochs);
    env_uint("QUERIES", tcfg.n_queries);
    env_uint("SUPPORTS", tcfg.m_supports);
    env_uint("LABEL_SUPPORTS", tcfg.u_supports);
    env_real("LR0", tcfg.lr0);
    env_real("DECAY", tcfg.decay);
    env_real("DROPOUT", tcfg.dropout);
    env_real("CLIP", tcfg.clip);
    env_uint("WORD_DIM", mcfg.encoder.word_dim);
    env_uint("CHAR_DIM", mcfg.encoder.char_dim);
    env_uint("CHAR_WINDOW", mcfg.encoder.char_window);
    env_uint("CHAR_FILTERS", mcfg.encoder.char_filters);
    env_uint("LSTM_LAYERS", mcfg.encoder.lstm_layers);
    env_uint("LSTM_UNITS", mcfg.encoder.lstm_units);
    env_uint("PROJ_DIM", mcfg.encoder.proj_dim);

    if (a.task) mcfg.task = task_from_string(*a.task);
    if (a.scoring) mcfg.scoring.mode = scoring_from_string(*a.scoring);
    if (a.similarity) mcfg.scoring.kind = similarity_from_string(*a.similarity);
    if (a.tau) mcfg.scoring.tau = *a.tau;
    if (a.seed) tcfg.seed = *a.seed;
    if (a.epochs) tcfg.epochs = *a.epochs;
    if (a.n_queries) tcfg.n_queries = *a.n_queries;
    if (a.m_supports) tcfg.m_supports = *a.m_supports;
    if (a.u_supports) tcfg.u_supports = *a.u_supports;
    if (a.lr0) tcfg.lr0 = *a.lr0;
    if (a.decay) tcfg.decay = *a.decay;
    if (a.dropout) tcfg.dropout = *a.dropout;
    if (a.clip) tcfg.clip = *a.clip;
    if (a.word_dim) mcfg.encoder.word_dim = *a.word_dim;
    if (a.char_dim) mcfg.encoder.char_dim = *a.char_dim;
    if (a.char_window) mcfg.encoder.char_window = *a.char_window;
    if (a.char_filters) mcfg.encoder.char_filters = *a.char_filters;
    if (a.lstm_layers) mcfg.encoder.lstm_layers = *a.lstm_layers;
    if (a.lstm_units) mcfg.encoder.lstm_units = *a.lstm_units;
    if (a.proj_dim) mcfg.encoder.proj_dim = *a.proj_dim;

    const Treebank train_tb = load_conllu_file(a.train_path);
    const Treebank dev_tb = load_conllu_file(a.dev_path);
    const Vocabulary vocab = build_vocab(train_tb, a.min_freq);

    std::optional<PretrainedVectors> pretrained;
    if (!a.vectors_path.empty()) {
        pretrained = load_word_vectors(a.vectors_path, vocab);
        mcfg.encoder.word_dim = pretrained->dim;
        std::cerr << "edgekit: " << pretrained->n_covered << "/" << vocab.words.size()
                  << " vocabulary words covered by '" << a.vectors_path << "'\n";
    }

    std::filesystem::create_directories(a.out_dir);
    const std::string log_path = a.out_dir + "/train_log.jsonl";
    std::ofstream log(log_path);
    require(log.good(), "cannot write training log to '", log_path, "'");

    const auto on_epoch = [&](const EpochRecord& r) {
        log << json{{"epoch", r.epoch},
                    {"loss", r.loss},
                    {"dev_score", r.dev_score},
                    {"lr", r.lr}}
                   .dump()
            << "\n";
        log.flush();
        std::cerr << "epoch " << r.epoch << "  loss " << r.loss << "  dev " << r.dev_score
                  << "  lr " << r.lr << "\n";
    };

    TrainResult result = train(mcfg, tcfg, vocab, train_tb, dev_tb,
                               pretrained ? &*pretrained : nullptr, on_epoch);

    const std::string ckpt_path = a.out_dir + "/model.ckpt";
    save_checkpoint(ckpt_path, result.model);
    std::cout << "best dev " << result.model.dev_score << " at epoch "
              << result.model.best_epoch << "; wrote " << ckpt_path << "\n";
    return 0;
}

// --- precompute --------------------------------------------------------------

int cmd_precompute(const std::string& ckpt_path, const std::string& train_path,
                   const std::string& out_dir, std::optional<std::string> kind_flag,
                   bool no_index, size_t threads) {
    if (auto v = env_value("SIMILARITY"); v && !kind_flag) kind_flag = *v;
    env_threads(threads);

    const ParserModel m = load_checkpoint(ckpt_path);
    const Similarity kind =
        kind_flag ? similarity_from_string(*kind_flag) : m.config.scoring.kind;
    const Treebank train_tb = load_conllu_file(train_path);

    const PrecomputeResult pre =
        precompute_support(m, train_tb, kind, threads, /*build_index=*/!no_index);

    std::filesystem::create_directories(out_dir);
    const std::string summary_path = out_dir + "/summary.bin";
    save_summary(summary_path, pre.summary);
    std::cout << "summary over " << pre.summary.head_count << " support edges ("
              << to_string(kind) << ") -> " << summary_path << "\n";
    if (!no_index) {
        const std::string index_path = out_dir + "/explain.idx";
        save_explain_index(index_path, pre.index);
        std::cout << "explain index with " << pre.index.size() << " entries -> " << index_path
                  << "\n";
    }
    return 0;
}

// --- parse -------------------------------------------------------------------

struct ParseArgs {
    std::string head_ckpt, head_summary, head_index;
    std::string label_ckpt, label_summary, label_index;
    std::string input_path, output_path;
    std::optional<std::string> mode, decoder;
    std::optional<std::string> scoring, similarity, label_scoring, label_similarity;
    std::optional<Real> tau, label_tau;
    bool single_root = false;
    size_t threads = 1;
};

ParserSession make_session(const ParseArgs& a) {
    ModelBundle head =
        make_bundle(a.head_ckpt, a.head_summary, a.head_index, a.scoring, a.similarity, a.tau);
    std::optional<ModelBundle> label;
    if (!a.label_ckpt.empty())
        label = make_bundle(a.label_ckpt, a.label_summary, a.label_index, a.label_scoring,
                            a.label_similarity, a.label_tau);
    ParseMode mode = a.mode ? parse_mode_from_string(*a.mode) : ParseMode::fast;
    Decoder decoder = a.decoder ? decoder_from_string(*a.decoder) : Decoder::greedy;
    return ParserSession(std::move(head), std::move(label), mode, decoder, a.single_root);
}

int cmd_parse(ParseArgs a) {
    if (auto v = env_value("MODE"); v && !a.mode) a.mode = *v;
    if (auto v = env_value("DECODER"); v && !a.decoder) a.decoder = *v;
    env_threads(a.threads);

    const ParserSession session = make_session(a);
    const Treebank input = load_conllu_file(a.input_path, ConlluOptions{false});
    const Treebank parsed = session.parse_treebank(input, a.threads);
    ensure_parent_dir(a.output_path);
    save_conllu_file(parsed, a.output_path);
    std::cout << "parsed " << parsed.sentences.size() << " sentences (" << to_string(session.mode())
              << ") -> " << a.output_path << "\n";
    return 0;
}

// --- explain -----------------------------------------------------------------

int cmd_explain(ParseArgs a, size_t k, const std::string& out_path) {
    env_uint("K", k);
    env_threads(a.threads);
    a.mode = std::string("explainable");
    if (!a.scoring) a.scoring = std::string("instance");

    const ParserSession session = make_session(a);
    const Treebank input = load_conllu_file(a.input_path, ConlluOptions{false});

    std::vector<std::string> lines(input.sentences.size());
    parallel_for(input.sentences.size(), a.threads, [&](size_t si) {
        const Sentence& s = input.sentences[si];
        if (s.tokens.empty()) return;
        const ParseResult res = session.parse(s);
        std::string block;
        for (size_t i = 1; i <= s.tokens.size(); ++i) {
            const Rationale r = session.explain_edge(s, si, res.heads[i - 1], i, k);
            block += rationale_to_json(r, session.head().model.vocab).dump();
            block += "\n";
        }
        lines[si] = std::move(block);
    });

    ensure_parent_dir(out_path);
    std::ofstream out(out_path);
    require(out.good(), "cannot write rationales to '", out_path, "'");
    for (const std::string& block : lines) out << block;
    require(out.good(), "failed while writing rationales to '", out_path, "'");
    std::cout << "rationales (top-" << k << ") -> " << out_path << "\n";
    return 0;
}

// --- evaluate ----------------------------------------------------------------

int cmd_evaluate(const std::vector<std::string>& pred_paths, const std::string& gold_path,
                 bool exclude_punct, const std::string& out_path, std::optional<double> min_uas,
                 std::optional<double> min_las) {
    const Treebank gold = load_conllu_file(gold_path);
    json files = json::array();
    double uas_sum = 0;
    double las_sum = 0;
    for (const std::string& path : pred_paths) {
        const Treebank pred = load_conllu_file(path, ConlluOptions{false});
        const ScoreReport r = attachment_scores(pred, gold, !exclude_punct);
        std::cout << path << "\tUAS " << r.uas << "\tLAS " << r.las << "\n";
        json jf = to_json_report(r);
        jf["path"] = path;
        files.push_back(std::move(jf));
        uas_sum += r.uas;
        las_sum += r.las;
    }
    const double n = static_cast<double>(pred_paths.size());
    const double mean_uas = uas_sum / n;
    const double mean_las = las_sum / n;
    if (pred_paths.size() > 1)
        std::cout << "mean\tUAS " << mean_uas << "\tLAS " << mean_las << "\n";

    if (!out_path.empty()) {
        ensure_parent_dir(out_path);
        write_report_json(out_path, json{{"kind", "attachment"},
                                         {"files", std::move(files)},
                                         {"mean", {{"uas", mean_uas}, {"las", mean_las}}}});
    }
    if ((min_uas && mean_uas < *min_uas) || (min_las && mean_las < *min_las)) {
        std::cerr << "edgekit: error: scores below required threshold\n";
        return 1;
    }
    return 0;
}

// --- subclass test -------------------------------------------------------------

int cmd_subclass(ParseArgs a, const std::string& dev_path, const std::string& out_path) {
    env_threads(a.threads);
    a.scoring = a.scoring ? a.scoring : std::string("instance");
    require(*a.scoring == "instance", "the subclass test is defined for instance scoring");
    require(!a.head_summary.empty() && !a.head_index.empty(),
            "the subclass test needs --summary and --index from 'edgekit precompute'");

    const ParserSession session = make_session(a);
    const Treebank dev = load_conllu_file(dev_path);
    const ScoreReport r = identical_subclass_test(session, dev, a.threads);
    std::cout << "subclass LAS " << r.las << " (head accuracy " << r.uas << ", " << r.total
              << " tokens)\n";
    if (!out_path.empty()) {
        ensure_parent_dir(out_path);
        json body = to_json_report(r);
        body["kind"] = "subclass";
        write_report_json(out_path, body);
    }
    return 0;
}

// --- hubness -----------------------------------------------------------------

int cmd_hubness(ParseArgs a, size_t k, size_t top_m, const std::string& out_path,
                const std::string& curve_path) {
    env_uint("K", k);
    env_threads(a.threads);
    a.scoring = a.scoring ? a.scoring : std::string("instance");

    const ParserSession session = make_session(a);
    require(session.head().index.has_value(),
            "hubness needs an explain index; run 'edgekit precompute'");
    const ExplainIndex& index = *session.head().index;
    const Treebank queries = load_conllu_file(a.input_path, ConlluOptions{false});

    const Tensor reps = predicted_query_reps(session, queries, a.threads);
    const ScoringConfig& sc = session.head().scoring;
    const HubnessReport r = hubness(index, reps, sc.kind, sc.tau, k, a.threads);

    size_t total = 0;
    for (size_t c : r.counts) total += c;
    if (index.size() >= k)
        require(total == k * r.n_queries, "hubness conservation violated: counts sum to ",
                total, ", expected ", k * r.n_queries);
    std::cout << "N_" << k << " over " << r.n_queries << " queries: max " << r.max_count
              << ", median " << r.median_count << ", conservation " << total << " = " << k
              << " x " << r.n_queries << "\n";

    if (!out_path.empty()) {
        ensure_parent_dir(out_path);
        json body = to_json_report(r, index, top_m);
        body["kind"] = "hubness";
        write_report_json(out_path, body);
    }
    if (!curve_path.empty()) {
        ensure_parent_dir(curve_path);
        write_hubness_tsv(curve_path, r, index, top_m);
    }
    return 0;
}

// --- synth -------------------------------------------------------------------

int cmd_synth(const std::string& kind, size_t n, size_t dev_n, std::uint64_t seed,
              const std::string& out_path, const std::string& dev_out_path) {
    Rng rng(seed);
    const auto generate = [&](size_t count) {
        if (kind == "toy") return toy_grammar(count, rng);
        if (kind == "english") return synth_english(count, rng);
        fail("unknown corpus kind '", kind, "' (expected toy or english)");
    };
    const Treebank train = generate(n);
    ensure_parent_dir(out_path);
    save_conllu_file(train, out_path);
    std::cout << n << " " << kind << " sentences -> " << out_path << "\n";
    if (!dev_out_path.empty()) {
        require(dev_n > 0, "--dev-out needs --dev-n greater than zero");
        const Treebank dev = generate(dev_n);
        ensure_parent_dir(dev_out_path);
        save_conllu_file(dev, dev_out_path);
        std::cout << dev_n << " " << kind << " sentences -> " << dev_out_path << "\n";
    }
    return 0;
}

void add_bundle_options(CLI::App* cmd, ParseArgs& a, bool with_label) {
    cmd->add_option("--checkpoint,--head-checkpoint", a.head_ckpt, "Head-task checkpoint")
        ->required();
    cmd->add_option("--summary,--head-summary", a.head_summary, "Support summary (fast mode)");
    cmd->add_option("--index,--head-index", a.head_index, "Explain index (explainable mode)");
    cmd->add_option("--scoring", a.scoring, "Inference scoring: weight|instance");
    cmd->add_option("--similarity", a.similarity, "Similarity: dot|cos");
    cmd->add_option("--tau", a.tau, "Cosine scale");
    if (with_label) {
        cmd->add_option("--label-checkpoint", a.label_ckpt, "Label-task checkpoint");
        cmd->add_option("--label-summary", a.label_summary, "Label support summary");
        cmd->add_option("--label-index", a.label_index, "Label explain index");
        cmd->add_option("--label-scoring", a.label_scoring, "Label scoring: weight|instance");
        cmd->add_option("--label-similarity", a.label_similarity, "Label similarity: dot|cos");
        cmd->add_option("--label-tau", a.label_tau, "Label cosine scale");
    }
    cmd->add_option("--threads", a.threads, "Worker threads (1 = bit-reproducible)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "edgekit: instance-based neural dependency parser\n"
        "Settings layer as config file < EDGEKIT_* environment < flags."};
    app.require_subcommand(1);

    // train
    TrainArgs ta;
    CLI::App* train_cmd = app.add_subcommand("train", "Train a head- or label-task model");
    train_cmd->add_option("--train", ta.train_path, "Training CoNLL-U")->required();
    train_cmd->add_option("--dev", ta.dev_path, "Development CoNLL-U")->required();
    train_cmd->add_option("--out", ta.out_dir, "Output directory")->required();
    train_cmd->add_option("--config", ta.config_path, "JSON config file");
    train_cmd->add_option("--vectors", ta.vectors_path, "Pretrained word vectors (text format)");
    train_cmd->add_option("--task", ta.task, "head|label");
    train_cmd->add_option("--scoring", ta.scoring, "weight|instance");
    train_cmd->add_option("--similarity", ta.similarity, "dot|cos");
    train_cmd->add_option("--tau", ta.tau, "Cosine scale");
    train_cmd->add_option("--seed", ta.seed, "RNG seed");
    train_cmd->add_option("--epochs", ta.epochs, "Training epochs");
    train_cmd->add_option("--queries", ta.n_queries, "Query sentences per step");
    train_cmd->add_option("--supports", ta.m_supports, "Support sentences per step");
    train_cmd->add_option("--label-supports", ta.u_supports, "Support edges per label");
    train_cmd->add_option("--lr0", ta.lr0, "Initial learning rate");
    train_cmd->add_option("--decay", ta.decay, "Learning-rate decay");
    train_cmd->add_option("--dropout", ta.dropout, "Dropout rate");
    train_cmd->add_option("--clip", ta.clip, "Gradient-norm clip");
    train_cmd->add_option("--min-freq", ta.min_freq, "Minimum word frequency for the vocabulary");
    train_cmd->add_option("--word-dim", ta.word_dim, "Word embedding size");
    train_cmd->add_option("--char-dim", ta.char_dim, "Character embedding size");
    train_cmd->add_option("--char-window", ta.char_window, "Character CNN window");
    train_cmd->add_option("--char-filters", ta.char_filters, "Character CNN filters");
    train_cmd->add_option("--lstm-layers", ta.lstm_layers, "BiLSTM layers");
    train_cmd->add_option("--lstm-units", ta.lstm_units, "BiLSTM units per direction");
    train_cmd->add_option("--proj-dim", ta.proj_dim, "Dependent/head projection size");
    train_cmd->add_option("--threads", ta.threads, "Worker threads");

    // precompute
    std::string pc_ckpt, pc_train, pc_out;
    std::optional<std::string> pc_kind;
    bool pc_no_index = false;
    size_t pc_threads = 1;
    CLI::App* pc_cmd =
        app.add_subcommand("precompute", "Build the support summary and explain index");
    pc_cmd->add_option("--checkpoint", pc_ckpt, "Trained checkpoint")->required();
    pc_cmd->add_option("--train", pc_train, "Training CoNLL-U (the support set)")->required();
    pc_cmd->add_option("--out", pc_out, "Output directory")->required();
    pc_cmd->add_option("--similarity", pc_kind, "dot|cos (default: the checkpoint's)");
    pc_cmd->add_flag("--no-index", pc_no_index, "Skip the explain index");
    pc_cmd->add_option("--threads", pc_threads, "Worker threads");

    // parse
    ParseArgs pa;
    CLI::App* parse_cmd = app.add_subcommand("parse", "Parse CoNLL-U input");
    add_bundle_options(parse_cmd, pa, /*with_label=*/true);
    parse_cmd->add_option("--input", pa.input_path, "Input CoNLL-U")->required();
    parse_cmd->add_option("--output", pa.output_path, "Output CoNLL-U")->required();
    parse_cmd->add_option("--mode", pa.mode, "fast|explainable");
    parse_cmd->add_option("--decoder", pa.decoder, "greedy|cle");
    parse_cmd->add_flag("--single-root", pa.single_root, "Force exactly one ROOT arc (cle)");

    // explain
    ParseArgs ea;
    size_t ex_k = 10;
    std::string ex_out;
    CLI::App* ex_cmd = app.add_subcommand("explain", "Emit per-edge rationale JSONL");
    add_bundle_options(ex_cmd, ea, /*with_label=*/false);
    ex_cmd->add_option("--input", ea.input_path, "Input CoNLL-U")->required();
    ex_cmd->add_option("--output", ex_out, "Rationale JSONL path")->required();
    ex_cmd->add_option("--k", ex_k, "Neighbors per edge");
    ex_cmd->add_option("--decoder", ea.decoder, "greedy|cle");

    // evaluate
    std::vector<std::string> ev_preds;
    std::string ev_gold, ev_out;
    bool ev_no_punct = false;
    std::optional<double> ev_min_uas, ev_min_las;
    CLI::App* ev_cmd = app.add_subcommand("evaluate", "UAS/LAS against gold");
    ev_cmd->add_option("--pred", ev_preds, "Predicted CoNLL-U (repeat for seed averaging)")
        ->required();
    ev_cmd->add_option("--gold", ev_gold, "Gold CoNLL-U")->required();
    ev_cmd->add_flag("--exclude-punct", ev_no_punct, "Skip all-punctuation tokens");
    ev_cmd->add_option("--out", ev_out, "JSON report path");
    ev_cmd->add_option("--min-uas", ev_min_uas, "Fail (exit 1) below this mean UAS");
    ev_cmd->add_option("--min-las", ev_min_las, "Fail (exit 1) below this mean LAS");

    // subclass-test
    ParseArgs sa;
    std::string sc_dev, sc_out;
    CLI::App* sc_cmd =
        app.add_subcommand("subclass-test", "Label agreement of nearest support edges");
    add_bundle_options(sc_cmd, sa, /*with_label=*/false);
    sc_cmd->add_option("--dev", sc_dev, "Development CoNLL-U")->required();
    sc_cmd->add_option("--out", sc_out, "JSON report path");

    // hubness
    ParseArgs ha;
    size_t hu_k = 10, hu_top = 100;
    std::string hu_out, hu_curve;
    CLI::App* hu_cmd = app.add_subcommand("hubness", "N_k concentration of retrieved edges");
    add_bundle_options(hu_cmd, ha, /*with_label=*/false);
    hu_cmd->add_option("--input", ha.input_path, "Query CoNLL-U (its predicted edges)")
        ->required();
    hu_cmd->add_option("--k", hu_k, "Neighbors per query");
    hu_cmd->add_option("--top", hu_top, "Rows in the ranked hub list");
    hu_cmd->add_option("--out", hu_out, "JSON report path");
    hu_cmd->add_option("--curve", hu_curve, "TSV curve path (rank vs N_k)");

    // synth
    std::string sy_kind = "toy", sy_out, sy_dev_out;
    size_t sy_n = 200, sy_dev_n = 0;
    std::uint64_t sy_seed = 1;
    CLI::App* sy_cmd = app.add_subcommand("synth", "Generate a synthetic treebank");
    sy_cmd->add_option("--kind", sy_kind, "toy|english");
    sy_cmd->add_option("--n", sy_n, "Training sentences");
    sy_cmd->add_option("--seed", sy_seed, "RNG seed");
    sy_cmd->add_option("--out", sy_out, "Training CoNLL-U path")->required();
    sy_cmd->add_option("--dev-out", sy_dev_out, "Development CoNLL-U path");
    sy_cmd->add_option("--dev-n", sy_dev_n, "Development sentences");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "edgekit: error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*train_cmd) {
            env_threads(ta.threads);
            return cmd_train(ta);
        }
        if (*pc_cmd) return cmd_precompute(pc_ckpt, pc_train, pc_out, pc_kind, pc_no_index,
                                           pc_threads);
        if (*parse_cmd) return cmd_parse(pa);
        if (*ex_cmd) return cmd_explain(ea, ex_k, ex_out);
        if (*ev_cmd)
            return cmd_evaluate(ev_preds, ev_gold, ev_no_punct, ev_out, ev_min_uas, ev_min_las);
        if (*sc_cmd) return cmd_subclass(sa, sc_dev, sc_out);
        if (*hu_cmd) return cmd_hubness(ha, hu_k, hu_top, hu_out, hu_curve);
        if (*sy_cmd) return cmd_synth(sy_kind, sy_n, sy_dev_n, sy_seed, sy_out, sy_dev_out);
    } catch (const std::exception& e) {
        std::cerr << "edgekit: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
