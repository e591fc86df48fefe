#ifndef EDGEKIT_CONLLU_HPP
#define EDGEKIT_CONLLU_HPP

#include <string>
#include <vector>

#include "edgekit/common.hpp"

namespace edgekit {

/// One syntactic token. `index` is the 1-based position; `head` is the
/// 1-based index of the governor, 0 meaning the ROOT sentinel. Multiword
/// token ranges and empty nodes are dropped at parse time and never
/// appear here.
struct Token {
    int index = 0;
    std::string form;
    int head = 0;
    std::string deprel;

    bool has_head() const { return head >= 0; }
    bool has_deprel() const { return !deprel.empty() && deprel != "_"; }
};

/// A sentence of T tokens; the ROOT sentinel at position 0 is implicit.
struct Sentence {
    std::vector<Token> tokens;

    int length() const { return static_cast<int>(tokens.size()); }
    const Token& token(int index) const { return tokens[static_cast<size_t>(index - 1)]; }
};

struct Treebank {
    std::vector<Sentence> sentences;
    /// Distinct deprel strings in first-occurrence order (the label set R).
    std::vector<std::string> labels;

    size_t token_count() const;
    size_t edge_count() const { return token_count(); }  // one gold edge per token
};

struct ConlluOptions {
    /// When false, "_" in the HEAD/DEPREL columns is accepted and stored
    /// as head=-1 / empty deprel (unannotated input for the parser).
    bool require_heads = true;
};

/// Parses CoNLL-U text. Comment lines, multiword-token ranges ("n-m") and
/// empty nodes ("n.m") are skipped; ID/FORM/HEAD/DEPREL are retained.
/// Malformed rows fail loudly with the 1-based line number.
Treebank parse_conllu(const std::string& text, const ConlluOptions& opts = {});
Treebank load_conllu_file(const std::string& path, const ConlluOptions& opts = {});

/// Emits 10-column CoNLL-U with "_" in unmodeled columns and one blank
/// line after each sentence.
std::string write_conllu(const Treebank& tb);
void save_conllu_file(const Treebank& tb, const std::string& path);

bool operator==(const Token& a, const Token& b);
bool operator==(const Sentence& a, const Sentence& b);
bool operator==(const Treebank& a, const Treebank& b);

}  // namespace edgekit

#endif
