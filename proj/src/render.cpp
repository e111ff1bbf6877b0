#include "jrt/render.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace jrt {

namespace {

struct Color {
  float r, g, b;
};

Color wall_color(RoomType t, Domain style) {
  if (style == Domain::Synthetic) {
    switch (t) {
      case RoomType::Bedroom: return {0.90f, 0.20f, 0.20f};
      case RoomType::Bathroom: return {0.20f, 0.40f, 0.90f};
      case RoomType::Kitchen: return {0.90f, 0.80f, 0.20f};
      case RoomType::LivingRoom: return {0.20f, 0.80f, 0.30f};
      case RoomType::Corridor: return {0.60f, 0.60f, 0.60f};
    }
  } else {
    // shifted, slightly desaturated palette; kept close enough to the
    // synthetic colors that feature adaptation can close the gap
    switch (t) {
      case RoomType::Bedroom: return {0.80f, 0.24f, 0.22f};
      case RoomType::Bathroom: return {0.23f, 0.41f, 0.79f};
      case RoomType::Kitchen: return {0.80f, 0.72f, 0.24f};
      case RoomType::LivingRoom: return {0.24f, 0.71f, 0.33f};
      case RoomType::Corridor: return {0.55f, 0.54f, 0.53f};
    }
  }
  return {0.5f, 0.5f, 0.5f};
}

Color ceiling_color(Domain style) {
  return style == Domain::Synthetic ? Color{0.95f, 0.95f, 0.98f} : Color{0.86f, 0.87f, 0.90f};
}

Color floor_color(Domain style) {
  return style == Domain::Synthetic ? Color{0.80f, 0.80f, 0.78f} : Color{0.66f, 0.63f, 0.60f};
}

struct RayHit {
  float dist_cells = 0.f;        // to the wall, in cell units
  int cell_x = 0, cell_y = 0;    // wall cell
  int side_room = -1;            // room the ray travelled through last
  float along = 0.f;             // fractional coordinate along the wall face
  bool clutter = false;          // passed through a clutter cell
  float clutter_dist_cells = 0.f;
};

// grid DDA in cell units
RayHit cast_ray(const HousePlan& h, float px, float py, float dx, float dy,
                const std::vector<uint8_t>& clutter_mask) {
  int cx = static_cast<int>(std::floor(px));
  int cy = static_cast<int>(std::floor(py));
  int step_x = dx > 0 ? 1 : -1;
  int step_y = dy > 0 ? 1 : -1;
  float inv_dx = dx != 0.f ? std::fabs(1.f / dx) : 1e30f;
  float inv_dy = dy != 0.f ? std::fabs(1.f / dy) : 1e30f;
  float tx = dx != 0.f ? ((dx > 0 ? (cx + 1 - px) : (px - cx)) * inv_dx) : 1e30f;
  float ty = dy != 0.f ? ((dy > 0 ? (cy + 1 - py) : (py - cy)) * inv_dy) : 1e30f;

  RayHit hit;
  int last_room = h.room_at(cx, cy);
  for (int guard = 0; guard < 4 * (h.width + h.height); ++guard) {
    bool x_side;
    float t;
    if (tx < ty) {
      cx += step_x;
      t = tx;
      tx += inv_dx;
      x_side = true;
    } else {
      cy += step_y;
      t = ty;
      ty += inv_dy;
      x_side = false;
    }
    if (h.cell(cx, cy) == Cell::Wall) {
      hit.dist_cells = t;
      hit.cell_x = cx;
      hit.cell_y = cy;
      hit.side_room = last_room;
      float hx = px + dx * t, hy = py + dy * t;
      hit.along = x_side ? (hy - std::floor(hy)) : (hx - std::floor(hx));
      return hit;
    }
    if (!hit.clutter && !clutter_mask.empty() &&
        clutter_mask[static_cast<size_t>(cy) * h.width + cx]) {
      hit.clutter = true;
      hit.clutter_dist_cells = std::max(t, 0.05f);
    }
    last_room = h.room_at(cx, cy);
  }
  hit.dist_cells = 1.f;  // unreachable with a closed outer wall
  return hit;
}

std::vector<uint8_t> clutter_cells(const HousePlan& h) {
  std::vector<uint8_t> mask(static_cast<size_t>(h.width) * h.height, 0);
  Rng rng(hash2(h.seed, 0xC1A77E5ULL));
  int want = 2 + static_cast<int>(h.rooms.size());
  for (int k = 0; k < want; ++k) {
    for (int tries = 0; tries < 50; ++tries) {
      int x = rng.uniform_int(1, h.width - 2);
      int y = rng.uniform_int(1, h.height - 2);
      if (h.cell(x, y) == Cell::Floor && h.room_at(x, y) >= 0) {
        mask[static_cast<size_t>(y) * h.width + x] = 1;
        break;
      }
    }
  }
  return mask;
}

uint32_t float_bits(float f) {
  uint32_t u;
  std::memcpy(&u, &f, sizeof(u));
  return u;
}

}  // namespace

bool pose_valid(const HousePlan& house, const AgentPose& pose) {
  int cx = static_cast<int>(std::floor(pose.x / kCellSize));
  int cy = static_cast<int>(std::floor(pose.y / kCellSize));
  return house.cell(cx, cy) == Cell::Floor;
}

Tensor render_image(const HousePlan& house, const AgentPose& pose, Domain style) {
  if (!pose_valid(house, pose)) throw std::invalid_argument("render: pose inside wall");

  const bool real_style = style == Domain::Real;
  std::vector<uint8_t> clutter = real_style ? clutter_cells(house) : std::vector<uint8_t>{};

  Tensor img({3, kImgSize, kImgSize});
  auto put = [&](int x, int y, Color c) {
    img[(0 * kImgSize + y) * kImgSize + x] = c.r;
    img[(1 * kImgSize + y) * kImgSize + x] = c.g;
    img[(2 * kImgSize + y) * kImgSize + x] = c.b;
  };

  float px = pose.x / kCellSize, py = pose.y / kCellSize;
  float heading = pose.heading_deg * static_cast<float>(M_PI) / 180.f;
  Color ceil_c = ceiling_color(style), floor_c = floor_color(style);

  for (int col = 0; col < kImgSize; ++col) {
    float off = (-kFovDeg / 2.f + (static_cast<float>(col) + 0.5f) * kFovDeg / kImgSize) *
                static_cast<float>(M_PI) / 180.f;
    float ang = heading + off;
    RayHit hit = cast_ray(house, px, py, std::cos(ang), std::sin(ang), clutter);

    float d_m = std::max(hit.dist_cells * kCellSize * std::cos(off), 1e-3f);
    int half = std::clamp(static_cast<int>(std::round(8.f / d_m)), 1, kImgSize / 2);

    Color wc = hit.side_room >= 0
                   ? wall_color(house.rooms[static_cast<size_t>(hit.side_room)].type, style)
                   : Color{0.5f, 0.5f, 0.5f};
    if (real_style) {
      // vertical stripe texture keyed to the wall face position
      int stripe = (static_cast<int>(hit.along * 4.f) + hit.cell_x + hit.cell_y) & 1;
      if (stripe) wc = {wc.r * 0.9f, wc.g * 0.9f, wc.b * 0.9f};
    }

    int mid = kImgSize / 2;
    for (int y = 0; y < kImgSize; ++y) {
      if (y < mid - half)
        put(col, y, ceil_c);
      else if (y < mid + half)
        put(col, y, wc);
      else
        put(col, y, floor_c);
    }

    if (real_style && hit.clutter) {
      float cd_m = std::max(hit.clutter_dist_cells * kCellSize * std::cos(off), 1e-3f);
      if (cd_m < d_m) {
        int chalf = std::clamp(static_cast<int>(std::round(4.f / cd_m)), 1, kImgSize / 2);
        int base = std::min(mid + std::clamp(static_cast<int>(std::round(8.f / cd_m)), 1, kImgSize / 2),
                            kImgSize);
        for (int y = std::max(base - 2 * chalf, 0); y < base; ++y)
          put(col, y, {0.24f, 0.21f, 0.19f});
      }
    }
  }

  if (real_style) {
    // dimmer exposure plus a faint scanline pattern, the camera-artifact half
    // of the domain gap
    for (auto& v : img.data) v -= 0.08f;
    for (int c = 0; c < 3; ++c)
      for (int y = 1; y < kImgSize; y += 2)
        for (int x = 0; x < kImgSize; ++x)
          img[(c * kImgSize + y) * kImgSize + x] += 0.05f;
    uint64_t pose_hash = hash2(hash2(float_bits(pose.x), float_bits(pose.y)),
                               float_bits(pose.heading_deg));
    Rng noise(hash2(house.seed, pose_hash));
    for (auto& v : img.data) v = std::clamp(v + 0.15f * noise.normal(), 0.f, 1.f);
  }
  return img;
}

}  // namespace jrt
