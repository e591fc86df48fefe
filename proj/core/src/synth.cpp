#include "edgekit/synth.hpp"

#include <algorithm>
#include <array>

namespace edgekit {

namespace {

/// 1-based position of the appended token; head/deprel are linked later.
size_t push(std::vector<Token>& toks, std::string form) {
    Token t;
    t.form = std::move(form);
    toks.push_back(std::move(t));
    return toks.size();
}

void link(std::vector<Token>& toks, size_t pos, size_t head, const char* label) {
    toks[pos - 1].head = static_cast<int>(head);
    toks[pos - 1].deprel = label;
}

void finalize(Treebank& tb) {
    for (Sentence& s : tb.sentences)
        for (size_t i = 0; i < s.tokens.size(); ++i)
            s.tokens[i].index = static_cast<int>(i + 1);
    tb.labels.clear();
    for (const Sentence& s : tb.sentences)
        for (const Token& t : s.tokens)
            if (std::find(tb.labels.begin(), tb.labels.end(), t.deprel) == tb.labels.end())
                tb.labels.push_back(t.deprel);
}

/// Zipf-ish pick over n ranks, weight 1/(rank+1).
size_t zipf(Rng& rng, size_t n) {
    double total = 0;
    for (size_t i = 0; i < n; ++i) total += 1.0 / static_cast<double>(i + 1);
    double u = rng.uniform() * total;
    for (size_t i = 0; i < n; ++i) {
        u -= 1.0 / static_cast<double>(i + 1);
        if (u <= 0) return i;
    }
    return n - 1;
}

// --- toy grammar -----------------------------------------------------------

const std::array<const char*, 3> kToyDets = {"the", "a", "this"};
const std::array<const char*, 10> kToyAdjs = {"big",  "small", "red", "old",  "new",
                                              "good", "bad",   "tall", "dark", "fine"};
const std::array<const char*, 15> kToyNouns = {"dog",   "cat",  "bird",  "house", "tree",
                                               "car",   "book", "fish",  "child", "man",
                                               "woman", "city", "road",  "river", "stone"};
const std::array<const char*, 15> kToyVerbs = {"sees",    "likes",   "finds", "takes",
                                               "holds",   "wants",   "follows", "watches",
                                               "carries", "keeps",   "moves", "hits",
                                               "meets",   "helps",   "calls"};

/// [det] adj{0..2} noun; returns the noun position.
size_t toy_np(std::vector<Token>& toks, Rng& rng) {
    size_t det = 0;
    if (rng.uniform() < 0.7) det = push(toks, kToyDets[rng.index(kToyDets.size())]);
    std::vector<size_t> adjs;
    const double r = rng.uniform();
    const size_t n_adj = r < 0.5 ? 0 : (r < 0.85 ? 1 : 2);
    for (size_t a = 0; a < n_adj; ++a)
        adjs.push_back(push(toks, kToyAdjs[rng.index(kToyAdjs.size())]));
    const size_t noun = push(toks, kToyNouns[rng.index(kToyNouns.size())]);
    if (det != 0) link(toks, det, noun, "det");
    for (size_t a : adjs) link(toks, a, noun, "amod");
    return noun;
}

// --- synthetic English -----------------------------------------------------

const std::array<const char*, 40> kNouns = {
    "time",    "year",   "people", "way",     "day",    "man",    "thing",  "woman",
    "life",    "child",  "world",  "school",  "state",  "family", "student", "group",
    "country", "problem", "hand",  "part",    "place",  "case",   "week",   "company",
    "system",  "program", "question", "work", "night",  "point",  "home",   "water",
    "room",    "mother", "area",   "money",   "story",  "fact",   "month",  "book"};
const std::array<const char*, 24> kVerbs = {
    "makes", "takes",  "sees",   "gets",   "finds",  "gives", "tells",  "asks",
    "works", "seems",  "feels",  "leaves", "calls",  "keeps", "holds",  "brings",
    "writes", "sits",  "stands", "loses",  "pays",   "meets", "runs",   "moves"};
const std::array<const char*, 16> kAdjs = {"good",  "new",   "first", "last", "long",
                                           "great", "little", "own",  "other", "old",
                                           "right", "big",   "high",  "small", "large",
                                           "young"};
const std::array<const char*, 8> kAdvs = {"quickly", "slowly", "often",   "never",
                                          "really",  "always", "finally", "simply"};
const std::array<const char*, 6> kPreps = {"in", "on", "with", "at", "from", "under"};
const std::array<const char*, 4> kDets = {"the", "a", "this", "every"};
const std::array<const char*, 3> kAux = {"will", "can", "must"};
const std::array<const char*, 2> kMarks = {"because", "when"};
const std::array<const char*, 2> kCc = {"and", "or"};

template <size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& words) {
    return words[zipf(rng, N)];
}

size_t eng_np(std::vector<Token>& toks, Rng& rng, bool allow_pp);

/// prep + NP; the noun heads nothing yet, the prep attaches to it as case.
size_t eng_pp(std::vector<Token>& toks, Rng& rng) {
    const size_t prep = push(toks, pick(rng, kPreps));
    const size_t noun = eng_np(toks, rng, /*allow_pp=*/false);
    link(toks, prep, noun, "case");
    return noun;
}

/// [det] [adj]* [compound noun] noun [PP->nmod]; returns the head noun.
size_t eng_np(std::vector<Token>& toks, Rng& rng, bool allow_pp) {
    size_t det = 0;
    if (rng.uniform() < 0.8) det = push(toks, pick(rng, kDets));
    std::vector<size_t> adjs;
    const double r = rng.uniform();
    const size_t n_adj = r < 0.6 ? 0 : (r < 0.9 ? 1 : 2);
    for (size_t a = 0; a < n_adj; ++a) adjs.push_back(push(toks, pick(rng, kAdjs)));
    size_t compound = 0;
    if (rng.uniform() < 0.15) compound = push(toks, pick(rng, kNouns));
    const size_t noun = push(toks, pick(rng, kNouns));
    if (det != 0) link(toks, det, noun, "det");
    for (size_t a : adjs) link(toks, a, noun, "amod");
    if (compound != 0) link(toks, compound, noun, "compound");
    if (allow_pp && rng.uniform() < 0.2) {
        const size_t pp_noun = eng_pp(toks, rng);
        link(toks, pp_noun, noun, "nmod");
    }
    return noun;
}

/// Subject, optional aux, verb, optional adverb/object/PP; returns the verb.
size_t eng_clause(std::vector<Token>& toks, Rng& rng, bool full) {
    const size_t subj = eng_np(toks, rng, /*allow_pp=*/full);
    size_t aux = 0;
    if (rng.uniform() < 0.25) aux = push(toks, pick(rng, kAux));
    const size_t verb = push(toks, pick(rng, kVerbs));
    link(toks, subj, verb, "nsubj");
    if (aux != 0) link(toks, aux, verb, "aux");
    if (rng.uniform() < 0.3) {
        const size_t adv = push(toks, pick(rng, kAdvs));
        link(toks, adv, verb, "advmod");
    }
    size_t obj = 0;
    if (rng.uniform() < 0.7) {
        obj = eng_np(toks, rng, /*allow_pp=*/false);
        link(toks, obj, verb, "obj");
    }
    if (full && rng.uniform() < 0.35) {
        // the classic ambiguity: the same surface PP hangs off the verb or
        // off the object noun
        const size_t pp_noun = eng_pp(toks, rng);
        if (obj != 0 && rng.uniform() < 0.5)
            link(toks, pp_noun, obj, "nmod");
        else
            link(toks, pp_noun, verb, "obl");
    }
    return verb;
}

}  // namespace

Treebank toy_grammar(size_t n_sentences, Rng& rng) {
    require(n_sentences > 0, "asked for an empty corpus");
    Treebank tb;
    tb.sentences.reserve(n_sentences);
    for (size_t n = 0; n < n_sentences; ++n) {
        std::vector<Token> toks;
        const size_t subj = toy_np(toks, rng);
        const size_t verb = push(toks, kToyVerbs[rng.index(kToyVerbs.size())]);
        const size_t obj = toy_np(toks, rng);
        link(toks, subj, verb, "nsubj");
        link(toks, verb, 0, "root");
        link(toks, obj, verb, "obj");
        Sentence s;
        s.tokens = std::move(toks);
        tb.sentences.push_back(std::move(s));
    }
    finalize(tb);
    return tb;
}

Treebank synth_english(size_t n_sentences, Rng& rng) {
    require(n_sentences > 0, "asked for an empty corpus");
    Treebank tb;
    tb.sentences.reserve(n_sentences);
    for (size_t n = 0; n < n_sentences; ++n) {
        std::vector<Token> toks;
        const size_t main_verb = eng_clause(toks, rng, /*full=*/true);
        link(toks, main_verb, 0, "root");
        if (rng.uniform() < 0.15) {
            const size_t mark = push(toks, pick(rng, kMarks));
            const size_t sub_verb = eng_clause(toks, rng, /*full=*/false);
            link(toks, mark, sub_verb, "mark");
            link(toks, sub_verb, main_verb, "advcl");
        }
        if (rng.uniform() < 0.15) {
            const size_t comma = push(toks, ",");
            const size_t cc = push(toks, pick(rng, kCc));
            const size_t conj_verb = eng_clause(toks, rng, /*full=*/false);
            link(toks, comma, conj_verb, "punct");
            link(toks, cc, conj_verb, "cc");
            link(toks, conj_verb, main_verb, "conj");
        }
        const size_t stop = push(toks, ".");
        link(toks, stop, main_verb, "punct");
        Sentence s;
        s.tokens = std::move(toks);
        tb.sentences.push_back(std::move(s));
    }
    finalize(tb);
    return tb;
}

}  // namespace edgekit
