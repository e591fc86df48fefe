#ifndef EDGEKIT_SERDE_HPP
#define EDGEKIT_SERDE_HPP

#include "json.hpp"

#include "edgekit/model.hpp"
#include "edgekit/training.hpp"

namespace edgekit {

/// JSON bindings for the config structs and the vocabulary. The from_json
/// overloads merge: keys absent from the JSON leave the passed-in value
/// untouched, so partial config files and override layers compose.
void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);

void to_json(nlohmann::json& j, const ScoringConfig& c);
void from_json(const nlohmann::json& j, ScoringConfig& c);

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

void to_json(nlohmann::json& j, const Vocabulary& v);
void from_json(const nlohmann::json& j, Vocabulary& v);

}  // namespace edgekit

#endif
