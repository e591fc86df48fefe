#ifndef EDGEKIT_VOCAB_HPP
#define EDGEKIT_VOCAB_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgekit/conllu.hpp"
#include "edgekit/tensor.hpp"

namespace edgekit {

/// Decodes UTF-8 into codepoints; bytes of malformed sequences come back
/// one codepoint each so no input can fail.
std::vector<std::uint32_t> utf8_codepoints(const std::string& s);

/// Word, character and label id maps built from a treebank. Ids are dense
/// from 0 and assigned by first occurrence, so identical input yields an
/// identical vocabulary across runs.
struct Vocabulary {
    static constexpr size_t kWordUnk = 0;
    static constexpr size_t kWordRoot = 1;
    static constexpr size_t kCharUnk = 0;
    static constexpr size_t kCharPad = 1;

    std::vector<std::string> words;  // id -> form; [0]="<unk>", [1]="<root>"
    std::unordered_map<std::string, size_t> word_ids;
    std::vector<std::uint32_t> chars;  // id -> codepoint; [0]=unk, [1]=pad sentinels
    std::unordered_map<std::uint32_t, size_t> char_ids;
    std::vector<std::string> labels;
    std::unordered_map<std::string, size_t> label_ids;
    std::unordered_map<std::string, std::uint64_t> word_freq;

    size_t word_count() const { return words.size(); }
    size_t char_count() const { return chars.size(); }
    size_t label_count() const { return labels.size(); }

    size_t word_id(const std::string& form) const;              // UNK fallback
    std::vector<size_t> char_id_seq(const std::string& form) const;  // UNK fallback per char
    size_t label_id(const std::string& deprel) const;            // unknown label -> error
    const std::string& label_name(size_t id) const;

    std::uint64_t hash() const;
};

/// Words with frequency < min_freq map to UNK and get no id of their own;
/// the char vocabulary covers the characters of retained words.
Vocabulary build_vocab(const Treebank& tb, std::uint64_t min_freq = 1);

/// Pretrained word vectors in the one-token-per-line text convention
/// ("word v1 v2 ... vd"), with an optional "count dim" header line.
/// Lookup falls back to the lowercased form. Rows not covered by the file
/// keep their caller-provided initialization and stay trainable.
struct PretrainedVectors {
    size_t dim = 0;
    Tensor rows;                        // vocab.word_count() x dim
    std::vector<std::uint8_t> covered;  // 1 where the file supplied the row
    size_t n_covered = 0;
};

PretrainedVectors load_word_vectors(const std::string& path, const Vocabulary& vocab);

}  // namespace edgekit

#endif
