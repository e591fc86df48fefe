#ifndef EDGEKIT_EVALUATION_HPP
#define EDGEKIT_EVALUATION_HPP

#include <string>
#include <vector>

#include "edgekit/inference.hpp"

#include "json.hpp"

namespace edgekit {

/// Attachment scores as percentages; 0 <= las <= uas <= 100 by construction.
struct ScoreReport {
    double uas = 0;
    double las = 0;
    size_t total = 0;
    size_t correct_heads = 0;
    size_t correct_labeled = 0;
};

/// Token-level comparison of predicted vs gold trees. include_punct=false
/// drops tokens whose form is all ASCII punctuation from the counts.
ScoreReport attachment_scores(const Treebank& pred, const Treebank& gold,
                              bool include_punct = true);

/// Parse dev with the session, then for every correctly attached token check
/// whether the nearest support edge carries the token's gold label. uas is
/// the plain head accuracy, las the subclass score; incorrectly attached
/// tokens count as wrong. The head model must have seen head supervision
/// only, and the session needs an explain index.
ScoreReport identical_subclass_test(const ParserSession& session, const Treebank& dev,
                                    size_t n_threads = 1);

/// How often each support edge shows up among the k nearest neighbors of
/// the queries. ranking holds entry ids by decreasing count.
struct HubnessReport {
    size_t k = 10;
    size_t n_queries = 0;
    std::vector<size_t> counts;  // N_k per support edge, aligned with the index
    size_t max_count = 0;
    double median_count = 0;
    std::vector<size_t> ranking;
};

/// Exact k-NN per query row against the whole index; deterministic counts.
HubnessReport hubness(const ExplainIndex& index, const Tensor& query_reps, Similarity kind,
                      Real tau, size_t k = 10, size_t n_threads = 1);

/// Reps of the session's predicted edges over a treebank, one row per token
/// in sentence-then-token order; the usual hubness query set.
Tensor predicted_query_reps(const ParserSession& session, const Treebank& tb,
                            size_t n_threads = 1);

nlohmann::json to_json_report(const ScoreReport& r);
nlohmann::json to_json_report(const HubnessReport& r, const ExplainIndex& index, size_t top_m);

/// Wraps `body` in the versioned report envelope and writes it.
void write_report_json(const std::string& path, const nlohmann::json& body);

/// Rank / N_k / provenance rows for the top-m hubs, largest first.
void write_hubness_tsv(const std::string& path, const HubnessReport& r,
                       const ExplainIndex& index, size_t top_m);

}  // namespace edgekit

#endif
