#include "edgekit/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "edgekit/common.hpp"

namespace edgekit {

std::vector<std::uint32_t> utf8_codepoints(const std::string& s) {
    std::vector<std::uint32_t> out;
    size_t i = 0;
    const size_t n = s.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        size_t len;
        std::uint32_t cp;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1Fu;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0Fu;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07u;
        } else {
            out.push_back(b0);  // stray continuation byte
            ++i;
            continue;
        }
        if (i + len > n) {
            out.push_back(b0);  // truncated sequence
            ++i;
            continue;
        }
        bool ok = true;
        for (size_t k = 1; k < len; ++k) {
            const auto bk = static_cast<unsigned char>(s[i + k]);
            if ((bk & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (bk & 0x3Fu);
        }
        if (!ok) {
            out.push_back(b0);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

size_t Vocabulary::word_id(const std::string& form) const {
    auto it = word_ids.find(form);
    return it == word_ids.end() ? kWordUnk : it->second;
}

std::vector<size_t> Vocabulary::char_id_seq(const std::string& form) const {
    std::vector<size_t> out;
    for (std::uint32_t cp : utf8_codepoints(form)) {
        auto it = char_ids.find(cp);
        out.push_back(it == char_ids.end() ? kCharUnk : it->second);
    }
    return out;
}

size_t Vocabulary::label_id(const std::string& deprel) const {
    auto it = label_ids.find(deprel);
    require(it != label_ids.end(), "unknown dependency label '", deprel, "'");
    return it->second;
}

const std::string& Vocabulary::label_name(size_t id) const {
    require(id < labels.size(), "label id ", id, " out of range (", labels.size(), " labels)");
    return labels[id];
}

std::uint64_t Vocabulary::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& w : words) {
        h = fnv1a(w, h);
        h = fnv1a_u64(0x1f, h);
    }
    for (std::uint32_t c : chars) h = fnv1a_u64(c, h);
    for (const auto& l : labels) {
        h = fnv1a(l, h);
        h = fnv1a_u64(0x1f, h);
    }
    return h;
}

Vocabulary build_vocab(const Treebank& tb, std::uint64_t min_freq) {
    require(!tb.sentences.empty(), "cannot build a vocabulary from an empty treebank");
    Vocabulary v;
    v.words = {"<unk>", "<root>"};
    v.word_ids = {{"<unk>", Vocabulary::kWordUnk}, {"<root>", Vocabulary::kWordRoot}};
    v.chars = {0, 0};  // unk / pad sentinels; not real codepoints

    for (const auto& sent : tb.sentences)
        for (const auto& tok : sent.tokens) ++v.word_freq[tok.form];

    for (const auto& sent : tb.sentences) {
        for (const auto& tok : sent.tokens) {
            if (v.word_freq[tok.form] < min_freq) continue;
            if (v.word_ids.emplace(tok.form, v.words.size()).second) {
                v.words.push_back(tok.form);
                for (std::uint32_t cp : utf8_codepoints(tok.form)) {
                    if (v.char_ids.emplace(cp, v.chars.size()).second) v.chars.push_back(cp);
                }
            }
        }
    }
    for (const auto& name : tb.labels) {
        if (v.label_ids.emplace(name, v.labels.size()).second) v.labels.push_back(name);
    }
    return v;
}

PretrainedVectors load_word_vectors(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    require(in.good(), "cannot open word vector file ", path);

    // Matched file rows per surface form, exact form first, lowercase later.
    std::unordered_map<std::string, std::vector<Real>> by_form;
    std::vector<std::string> wanted;
    for (const auto& w : vocab.words) {
        wanted.push_back(w);
        std::string lower = w;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (lower != w) wanted.push_back(lower);
    }
    std::unordered_map<std::string, bool> want(wanted.size());
    for (const auto& w : wanted) want.emplace(w, true);

    PretrainedVectors out;
    std::string line;
    size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string form;
        ss >> form;
        std::vector<Real> vals;
        Real x;
        while (ss >> x) vals.push_back(x);
        if (first) {
            first = false;
            // A "count dim" header is two integer fields; skip it.
            if (vals.size() == 1 && !form.empty() &&
                form.find_first_not_of("0123456789") == std::string::npos) {
                out.dim = static_cast<size_t>(vals[0]);
                continue;
            }
        }
        if (out.dim == 0) out.dim = vals.size();
        require(vals.size() == out.dim, path, " line ", line_no, ": expected ", out.dim,
                " values, found ", vals.size());
        if (want.count(form) && !by_form.count(form)) by_form.emplace(form, std::move(vals));
    }
    require(out.dim > 0, path, " contains no word vectors");

    out.rows = Tensor(vocab.word_count(), out.dim);
    out.covered.assign(vocab.word_count(), 0);
    for (size_t i = 0; i < vocab.word_count(); ++i) {
        const std::string& w = vocab.words[i];
        auto it = by_form.find(w);
        if (it == by_form.end()) {
            std::string lower = w;
            std::transform(lower.begin(), lower.end(), lower.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            it = by_form.find(lower);
        }
        if (it == by_form.end()) continue;
        std::copy(it->second.begin(), it->second.end(), out.rows.row_ptr(i));
        out.covered[i] = 1;
        ++out.n_covered;
    }
    return out;
}

}  // namespace edgekit
