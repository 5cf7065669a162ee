#include "dner/tags.hpp"

namespace dner {

std::string_view tag_name(Tag t) {
  switch (t) {
    case Tag::BP: return "B-P";
    case Tag::IP: return "I-P";
    case Tag::BN: return "B-N";
    case Tag::IN: return "I-N";
    case Tag::O: return "O";
  }
  return "?";
}

std::optional<Tag> parse_tag(std::string_view s) {
  if (s == "B-P") return Tag::BP;
  if (s == "I-P") return Tag::IP;
  if (s == "B-N") return Tag::BN;
  if (s == "I-N") return Tag::IN;
  if (s == "O") return Tag::O;
  return std::nullopt;
}

char tag_entity_type(Tag t) {
  switch (t) {
    case Tag::BP:
    case Tag::IP: return 'P';
    case Tag::BN:
    case Tag::IN: return 'N';
    case Tag::O: return '\0';
  }
  return '\0';
}

bool tag_is_begin(Tag t) { return t == Tag::BP || t == Tag::BN; }
bool tag_is_inside(Tag t) { return t == Tag::IP || t == Tag::IN; }

}  // namespace dner
