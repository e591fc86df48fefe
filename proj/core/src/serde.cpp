#include "edgekit/serde.hpp"

namespace edgekit {

using nlohmann::json;

void to_json(json& j, const EncoderConfig& c) {
    j = json{{"word_dim", c.word_dim},     {"char_dim", c.char_dim},
             {"char_window", c.char_window}, {"char_filters", c.char_filters},
             {"lstm_layers", c.lstm_layers}, {"lstm_units", c.lstm_units},
             {"proj_dim", c.proj_dim},     {"dropout", c.dropout}};
}

void from_json(const json& j, EncoderConfig& c) {
    c.word_dim = j.value("word_dim", c.word_dim);
    c.char_dim = j.value("char_dim", c.char_dim);
    c.char_window = j.value("char_window", c.char_window);
    c.char_filters = j.value("char_filters", c.char_filters);
    c.lstm_layers = j.value("lstm_layers", c.lstm_layers);
    c.lstm_units = j.value("lstm_units", c.lstm_units);
    c.proj_dim = j.value("proj_dim", c.proj_dim);
    c.dropout = j.value("dropout", c.dropout);
}

void to_json(json& j, const ScoringConfig& c) {
    j = json{{"mode", to_string(c.mode)}, {"similarity", to_string(c.kind)}, {"tau", c.tau}};
}

void from_json(const json& j, ScoringConfig& c) {
    if (j.contains("mode")) c.mode = scoring_from_string(j.at("mode").get<std::string>());
    if (j.contains("similarity"))
        c.kind = similarity_from_string(j.at("similarity").get<std::string>());
    c.tau = j.value("tau", c.tau);
}

void to_json(json& j, const ModelConfig& c) {
    j = json{{"encoder", c.encoder}, {"scoring", c.scoring}, {"task", to_string(c.task)}};
}

void from_json(const json& j, ModelConfig& c) {
    if (j.contains("encoder")) j.at("encoder").get_to(c.encoder);
    if (j.contains("scoring")) j.at("scoring").get_to(c.scoring);
    if (j.contains("task")) c.task = task_from_string(j.at("task").get<std::string>());
}

void to_json(json& j, const TrainConfig& c) {
    j = json{{"n_queries", c.n_queries}, {"m_supports", c.m_supports},
             {"u_supports", c.u_supports}, {"lr0", c.lr0},
             {"decay", c.decay},         {"epochs", c.epochs},
             {"clip", c.clip},           {"dropout", c.dropout},
             {"seed", c.seed}};
}

void from_json(const json& j, TrainConfig& c) {
    c.n_queries = j.value("n_queries", c.n_queries);
    c.m_supports = j.value("m_supports", c.m_supports);
    c.u_supports = j.value("u_supports", c.u_supports);
    c.lr0 = j.value("lr0", c.lr0);
    c.decay = j.value("decay", c.decay);
    c.epochs = j.value("epochs", c.epochs);
    c.clip = j.value("clip", c.clip);
    c.dropout = j.value("dropout", c.dropout);
    c.seed = j.value("seed", c.seed);
}

void to_json(json& j, const Vocabulary& v) {
    j = json{{"words", v.words}, {"chars", v.chars}, {"labels", v.labels}};
}

void from_json(const json& j, Vocabulary& v) {
    v = Vocabulary{};
    j.at("words").get_to(v.words);
    j.at("chars").get_to(v.chars);
    j.at("labels").get_to(v.labels);
    for (size_t i = 0; i < v.words.size(); ++i) v.word_ids[v.words[i]] = i;
    // the two leading char slots are the UNK/PAD sentinels, not codepoints
    for (size_t i = 2; i < v.chars.size(); ++i) v.char_ids[v.chars[i]] = i;
    for (size_t i = 0; i < v.labels.size(); ++i) v.label_ids[v.labels[i]] = i;
}

}  // namespace edgekit
