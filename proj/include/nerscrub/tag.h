// BIO2 tags and the entity type inventory.

#ifndef NERSCRUB_TAG_H_
#define NERSCRUB_TAG_H_

#include <optional>
#include <string>
#include <string_view>

namespace nerscrub {

enum class EntityKind { kNamed, kValue };

// Entity type name plus its named/value kind. The 18 OntoNotes types carry
// their fixed kind; any other identifier is accepted as a named type.
class EntityType {
 public:
  EntityType() = default;
  explicit EntityType(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  EntityKind kind() const { return KindOf(name_); }
  bool is_value() const { return kind() == EntityKind::kValue; }

  static EntityKind KindOf(std::string_view name);
  static bool IsPredefined(std::string_view name);
  static bool IsValidName(std::string_view name);

  friend bool operator==(const EntityType&, const EntityType&) = default;
  friend auto operator<=>(const EntityType&, const EntityType&) = default;

 private:
  std::string name_;
};

enum class TagKind : unsigned char { kOutside, kBegin, kInside };

struct Tag {
  TagKind kind = TagKind::kOutside;
  std::string type;  // empty iff kind == kOutside

  static Tag Outside() { return {}; }
  static Tag Begin(std::string t) { return {TagKind::kBegin, std::move(t)}; }
  static Tag Inside(std::string t) { return {TagKind::kInside, std::move(t)}; }

  // Accepts "O", "B-<type>", "I-<type>"; anything else is nullopt.
  static std::optional<Tag> Parse(std::string_view s);

  bool is_outside() const { return kind == TagKind::kOutside; }
  bool is_begin() const { return kind == TagKind::kBegin; }
  bool is_inside() const { return kind == TagKind::kInside; }

  std::string str() const;

  friend bool operator==(const Tag&, const Tag&) = default;
};

}  // namespace nerscrub

#endif  // NERSCRUB_TAG_H_
