#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nsvqa/clf.hpp"

namespace nsvqa {

/// Position of an object inside an ImageSet: image slot, then object slot.
/// Ordering is graph order, which defines "first object".
struct ObjectRef {
  std::uint32_t image = 0;
  std::uint32_t object = 0;

  auto operator<=>(const ObjectRef&) const = default;
};

/// Sorted, duplicate-free.
struct ObjectSet {
  std::vector<ObjectRef> members;

  bool operator==(const ObjectSet&) const = default;
};

struct ObjectGroup {
  std::uint32_t image = 0;
  ObjectSet members;

  bool operator==(const ObjectGroup&) const = default;
};

/// One group per image, in ImageSet order (groups may be empty).
struct GroupedObjects {
  std::vector<ObjectGroup> groups;

  bool operator==(const GroupedObjects&) const = default;
};

/// Image ids in ImageSet order.
struct TokenSet {
  std::vector<std::string> tokens;

  bool operator==(const TokenSet&) const = default;
};

// Alternative order matches ValueType.
using Value = std::variant<ObjectSet, GroupedObjects, std::int64_t, bool, std::string, TokenSet>;

inline ValueType type_of(const Value& v) { return static_cast<ValueType>(v.index()); }

}  // namespace nsvqa
