#include "edgekit/conllu.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace edgekit {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cols;
    size_t start = 0;
    while (true) {
        size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            cols.push_back(line.substr(start));
            break;
        }
        cols.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return cols;
}

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

void finish_sentence(Treebank& tb, Sentence& sent, std::unordered_set<std::string>& seen,
                     size_t line_no, bool require_heads) {
    if (sent.tokens.empty()) return;
    int t = sent.length();
    for (const Token& tok : sent.tokens) {
        if (tok.has_head()) {
            require(tok.head <= t, "line ", line_no, ": HEAD ", tok.head,
                    " out of range for sentence of length ", t);
            require(tok.head != tok.index, "line ", line_no, ": token ", tok.index,
                    " is its own head");
        } else {
            require(!require_heads, "line ", line_no, ": missing HEAD for token ", tok.index);
        }
        if (tok.has_deprel() && seen.insert(tok.deprel).second) tb.labels.push_back(tok.deprel);
    }
    tb.sentences.push_back(std::move(sent));
    sent = Sentence{};
}

}  // namespace

size_t Treebank::token_count() const {
    size_t n = 0;
    for (const Sentence& s : sentences) n += s.tokens.size();
    return n;
}

Treebank parse_conllu(const std::string& text, const ConlluOptions& opts) {
    Treebank tb;
    Sentence sent;
    std::unordered_set<std::string> seen_labels;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    int expected_index = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            finish_sentence(tb, sent, seen_labels, line_no, opts.require_heads);
            expected_index = 1;
            continue;
        }
        if (line[0] == '#') continue;
        std::vector<std::string> cols = split_tabs(line);
        require(cols.size() == 10, "line ", line_no, ": expected 10 tab-separated columns, got ",
                cols.size());
        const std::string& id = cols[0];
        // multiword-token ranges ("n-m") and empty nodes ("n.m") are not
        // syntactic words; skip them
        if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) continue;
        require(is_integer(id), "line ", line_no, ": non-integer ID '", id, "'");
        Token tok;
        tok.index = std::stoi(id);
        require(tok.index == expected_index, "line ", line_no, ": ID ", tok.index,
                " breaks 1..T ordering (expected ", expected_index, ")");
        ++expected_index;
        tok.form = cols[1];
        const std::string& head = cols[6];
        if (head == "_" && !opts.require_heads) {
            tok.head = -1;
        } else {
            require(is_integer(head), "line ", line_no, ": non-integer HEAD '", head, "'");
            tok.head = std::stoi(head);
            require(tok.head >= 0, "line ", line_no, ": negative HEAD");
        }
        tok.deprel = cols[7];
        sent.tokens.push_back(std::move(tok));
    }
    finish_sentence(tb, sent, seen_labels, line_no + 1, opts.require_heads);
    return tb;
}

Treebank load_conllu_file(const std::string& path, const ConlluOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    require(in.is_open(), "cannot open CoNLL-U file: ", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_conllu(buf.str(), opts);
}

std::string write_conllu(const Treebank& tb) {
    std::ostringstream out;
    for (const Sentence& s : tb.sentences) {
        for (const Token& t : s.tokens) {
            out << t.index << '\t' << t.form << "\t_\t_\t_\t_\t";
            if (t.has_head())
                out << t.head;
            else
                out << '_';
            out << '\t' << (t.deprel.empty() ? "_" : t.deprel) << "\t_\t_\n";
        }
        out << '\n';
    }
    return out.str();
}

void save_conllu_file(const Treebank& tb, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.is_open(), "cannot write CoNLL-U file: ", path);
    out << write_conllu(tb);
}

bool operator==(const Token& a, const Token& b) {
    return a.index == b.index && a.form == b.form && a.head == b.head && a.deprel == b.deprel;
}

bool operator==(const Sentence& a, const Sentence& b) { return a.tokens == b.tokens; }

bool operator==(const Treebank& a, const Treebank& b) {
    return a.sentences == b.sentences && a.labels == b.labels;
}

}  // namespace edgekit
