#ifndef EDGEKIT_CHECKPOINT_HPP
#define EDGEKIT_CHECKPOINT_HPP

#include <string>

#include "edgekit/model.hpp"

namespace edgekit {

/// All three artifacts share one container: an 8-byte magic, a JSON header
/// (config, vocabulary, hashes, tensor directory), then each tensor's raw
/// little-endian values in directory order. Loads reject wrong magic,
/// wrong container kind, dtype mismatches and vocabulary-hash mismatches.
void save_checkpoint(const std::string& path, const ParserModel& m);
ParserModel load_checkpoint(const std::string& path);

void save_summary(const std::string& path, const SupportSummary& s);
SupportSummary load_summary(const std::string& path);

void save_explain_index(const std::string& path, const ExplainIndex& idx);
ExplainIndex load_explain_index(const std::string& path);

}  // namespace edgekit

#endif
