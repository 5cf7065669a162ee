#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace dner {

// The five-tag IOB2 scheme over positive/negative entity mentions. Index
// order is fixed; it is used for serialization and decode tie-breaking.
enum class Tag : int { BP = 0, IP = 1, BN = 2, IN = 3, O = 4 };

inline constexpr int kNumTags = 5;

std::string_view tag_name(Tag t);
std::optional<Tag> parse_tag(std::string_view s);

// 'P', 'N' for entity tags; '\0' for O.
char tag_entity_type(Tag t);
bool tag_is_begin(Tag t);
bool tag_is_inside(Tag t);

}  // namespace dner
