#ifndef EDGEKIT_SYNTH_HPP
#define EDGEKIT_SYNTH_HPP

#include "edgekit/conllu.hpp"
#include "edgekit/rng.hpp"

namespace edgekit {

/// Tiny deterministic grammar: subject NP, verb, object NP with optional
/// determiners and adjectives. About 45 word forms, exactly 5 labels
/// (root, nsubj, obj, det, amod); attachment is a pure function of word
/// class and position, so a parser can learn it to near-perfect accuracy.
Treebank toy_grammar(size_t n_sentences, Rng& rng);

/// Richer corpus with a Zipf-weighted lexicon (~190 forms), 16 labels,
/// coordination, subordinate clauses, punctuation, and genuinely ambiguous
/// prepositional attachment (verb vs object noun), so scores plateau below
/// 100 and systems can be told apart.
Treebank synth_english(size_t n_sentences, Rng& rng);

}  // namespace edgekit

#endif
