#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace fedload {

// Opaque identifier of a server, user or room. Ordering is plain byte order,
// which is what std::string's char_traits comparison gives us.
class EntityId {
 public:
  EntityId() = delete;

  explicit EntityId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) {
      throw std::invalid_argument("entity id must not be empty");
    }
  }
  explicit EntityId(std::string_view value) : EntityId(std::string(value)) {}
  explicit EntityId(const char* value) : EntityId(std::string(value)) {}

  const std::string& str() const noexcept { return value_; }

  friend bool operator==(const EntityId&, const EntityId&) = default;
  friend std::strong_ordering operator<=>(const EntityId& a, const EntityId& b) {
    const int c = a.value_.compare(b.value_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const EntityId& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

inline EntityId operator""_id(const char* s, std::size_t n) {
  return EntityId(std::string_view(s, n));
}

}  // namespace fedload

template <>
struct std::hash<fedload::EntityId> {
  std::size_t operator()(const fedload::EntityId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
