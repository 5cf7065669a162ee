#pragma once

// Model files are a single JSON document: format version, model kind, feature
// flags and dimensions, each vocabulary as an ordered token list, and every
// parameter tensor with its shape and values.  Values are written as C99
// hexadecimal float literals so a save/load round trip is bit-exact, and the
// document carries a trailing integrity checksum over everything before it.

#include <string>

#include "dner/baseline.hpp"
#include "dner/tagger.hpp"

namespace dner {

inline constexpr int kModelFormatVersion = 1;

enum class ModelKind { kTagger, kBaseline };

void save_model(const TaggerModel& m, const std::string& path);
void save_model(const BaselineModel& m, const std::string& path);

std::string serialize_model(const TaggerModel& m);
std::string serialize_model(const BaselineModel& m);

// Reads only the kind field, so callers can dispatch before a full load.
ModelKind peek_model_kind(const std::string& path);

TaggerModel load_tagger(const std::string& path);
BaselineModel load_baseline(const std::string& path);

TaggerModel parse_tagger(const std::string& text);
BaselineModel parse_baseline(const std::string& text);

}  // namespace dner
