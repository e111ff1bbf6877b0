#pragma once

#include "jrt/house.hpp"
#include "jrt/tensor.hpp"

namespace jrt {

constexpr int kImgSize = 32;
constexpr float kFovDeg = 60.f;

struct AgentPose {
  float x = 0.f, y = 0.f;       // meters
  float heading_deg = 0.f;      // [0, 360)
};

/// RGB first-person view + domain tag + goal room type.
struct Observation {
  Tensor image;  // {3, 32, 32}, values in [0,1]
  Domain domain = Domain::Synthetic;
  RoomType goal = RoomType::Bedroom;
};

bool pose_valid(const HousePlan& house, const AgentPose& pose);

/// Column raycast over the occupancy grid: 32 rays across a 60 degree field
/// of view, wall-column height proportional to inverse perpendicular
/// distance. Synthetic style renders flat per-room-type colors; real style
/// shifts the palette, adds vertical wall stripes, per-house clutter columns
/// and clamped Gaussian pixel noise (sigma 0.05). Deterministic in
/// (house, pose, style).
Tensor render_image(const HousePlan& house, const AgentPose& pose, Domain style);

}  // namespace jrt
