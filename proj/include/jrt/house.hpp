#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jrt/rng.hpp"

namespace jrt {

enum class Domain : uint8_t { Synthetic = 0, Real = 1 };
enum class Cell : uint8_t { Wall = 0, Floor = 1 };
enum class RoomType : uint8_t { Bedroom = 0, Bathroom = 1, Kitchen = 2, LivingRoom = 3, Corridor = 4 };
constexpr int kNumRoomTypes = 5;
constexpr float kCellSize = 0.5f;  // meters

const char* domain_name(Domain d);
const char* room_type_name(RoomType t);

struct Room {
  int x, y, w, h;  // floor rectangle in cells
  RoomType type;
  bool contains(int cx, int cy) const { return cx >= x && cx < x + w && cy >= y && cy < y + h; }
  // centroid in meters
  float cx_m() const { return (static_cast<float>(x) + static_cast<float>(w) / 2.f) * kCellSize; }
  float cy_m() const { return (static_cast<float>(y) + static_cast<float>(h) / 2.f) * kCellSize; }
};

struct Door {
  int room_i, room_j;    // room_i < room_j
  int cx, cy;            // the opened wall cell
  int cx2 = -1, cy2 = -1;  // second opened cell for 1 m wide doors; -1 if none
};

/// Room graph + occupancy grid + room-type labels. Immutable once generated.
struct HousePlan {
  int width = 0, height = 0;
  std::vector<Cell> grid;        // width*height, row-major [y*width + x]
  std::vector<Room> rooms;
  std::vector<Door> doors;
  std::vector<int16_t> room_of;  // per cell; -1 for walls, door cells owned by room_i
  Domain domain = Domain::Synthetic;
  uint64_t seed = 0;

  Cell cell(int x, int y) const {
    if (x < 0 || x >= width || y < 0 || y >= height) return Cell::Wall;
    return grid[static_cast<size_t>(y) * width + x];
  }
  int room_at(int x, int y) const {
    if (x < 0 || x >= width || y < 0 || y >= height) return -1;
    return room_of[static_cast<size_t>(y) * width + x];
  }
  bool has_room_type(RoomType t) const {
    for (const auto& r : rooms)
      if (r.type == t) return true;
    return false;
  }
  void rebuild_room_of();
};

/// Deterministic procedural house. Synthetic: 2-5 rooms, tree connectivity.
/// Real: 5-10 rooms, at least one cycle. Bathrooms always share a door with a
/// bedroom and kitchens with a living room. Throws after 100 failed attempts.
HousePlan generate_house(Domain domain, uint64_t seed);

}  // namespace jrt
