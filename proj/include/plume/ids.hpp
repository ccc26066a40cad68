#pragma once

#include <cstdint>
#include <functional>

namespace plume {

// Dense integer handles for mesh entities. Handles stay stable while a
// refinement pass runs; compaction between passes renumbers edges, faces
// and tets (points are never removed).
template <class Tag>
struct Handle {
  static constexpr std::uint32_t invalid_value = 0xffffffffu;

  std::uint32_t value = invalid_value;

  constexpr Handle() = default;
  constexpr explicit Handle(std::uint32_t v) : value(v) {}

  constexpr bool valid() const { return value != invalid_value; }

  friend constexpr bool operator==(Handle a, Handle b) { return a.value == b.value; }
  friend constexpr bool operator!=(Handle a, Handle b) { return a.value != b.value; }
  friend constexpr bool operator<(Handle a, Handle b) { return a.value < b.value; }
  friend constexpr bool operator>(Handle a, Handle b) { return a.value > b.value; }
  friend constexpr bool operator<=(Handle a, Handle b) { return a.value <= b.value; }
  friend constexpr bool operator>=(Handle a, Handle b) { return a.value >= b.value; }
};

using PointId = Handle<struct PointIdTag>;
using EdgeId = Handle<struct EdgeIdTag>;
using FaceId = Handle<struct FaceIdTag>;
using TetId = Handle<struct TetIdTag>;

}  // namespace plume

namespace std {
template <class Tag>
struct hash<plume::Handle<Tag>> {
  size_t operator()(plume::Handle<Tag> h) const noexcept {
    return std::hash<uint32_t>{}(h.value);
  }
};
}  // namespace std
