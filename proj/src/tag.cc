#include "nerscrub/tag.h"

#include <algorithm>
#include <array>
#include <cctype>

namespace nerscrub {
namespace {

constexpr std::array<std::string_view, 7> kValueTypes = {
    "CARDINAL", "DATE", "MONEY", "ORDINAL", "PERCENT", "QUANTITY", "TIME"};

constexpr std::array<std::string_view, 11> kNamedTypes = {
    "EVENT", "FAC",  "GPE",    "LANGUAGE", "LAW",        "LOC",
    "NORP",  "ORG",  "PERSON", "PRODUCT",  "WORK_OF_ART"};

}  // namespace

EntityKind EntityType::KindOf(std::string_view name) {
  return std::find(kValueTypes.begin(), kValueTypes.end(), name) != kValueTypes.end()
             ? EntityKind::kValue
             : EntityKind::kNamed;
}

bool EntityType::IsPredefined(std::string_view name) {
  return std::find(kValueTypes.begin(), kValueTypes.end(), name) != kValueTypes.end() ||
         std::find(kNamedTypes.begin(), kNamedTypes.end(), name) != kNamedTypes.end();
}

bool EntityType::IsValidName(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

std::optional<Tag> Tag::Parse(std::string_view s) {
  if (s == "O") return Tag::Outside();
  if (s.size() < 3 || s[1] != '-') return std::nullopt;
  std::string_view type = s.substr(2);
  if (!EntityType::IsValidName(type)) return std::nullopt;
  if (s[0] == 'B') return Tag::Begin(std::string(type));
  if (s[0] == 'I') return Tag::Inside(std::string(type));
  return std::nullopt;
}

std::string Tag::str() const {
  switch (kind) {
    case TagKind::kBegin:
      return "B-" + type;
    case TagKind::kInside:
      return "I-" + type;
    case TagKind::kOutside:
      break;
  }
  return "O";
}

}  // namespace nerscrub
