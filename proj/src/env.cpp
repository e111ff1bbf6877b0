#include "jrt/env.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace jrt {

namespace {

bool blocked(const HousePlan& house, float x_m, float y_m) {
  int x0 = static_cast<int>(std::floor((x_m - kAgentRadius) / kCellSize));
  int x1 = static_cast<int>(std::floor((x_m + kAgentRadius) / kCellSize));
  int y0 = static_cast<int>(std::floor((y_m - kAgentRadius) / kCellSize));
  int y1 = static_cast<int>(std::floor((y_m + kAgentRadius) / kCellSize));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (house.cell(x, y) == Cell::Wall) return true;
  return false;
}

}  // namespace

float goal_distance(const HousePlan& house, const AgentPose& pose, RoomType goal) {
  float best = std::numeric_limits<float>::max();
  for (const auto& r : house.rooms) {
    if (r.type != goal) continue;
    best = std::min(best, std::hypot(pose.x - r.cx_m(), pose.y - r.cy_m()));
  }
  if (best == std::numeric_limits<float>::max())
    throw std::invalid_argument("goal_distance: goal room type not present");
  return best;
}

bool in_goal_room(const HousePlan& house, const AgentPose& pose, RoomType goal) {
  int cx = static_cast<int>(std::floor(pose.x / kCellSize));
  int cy = static_cast<int>(std::floor(pose.y / kCellSize));
  int r = house.room_at(cx, cy);
  return r >= 0 && house.rooms[static_cast<size_t>(r)].type == goal;
}

StepOut env_step(const HousePlan& house, const AgentPose& pose, Action action, RoomType goal) {
  StepOut out;
  out.pose = pose;
  float d_prev = goal_distance(house, pose, goal);

  if (action == Action::TurnLeft) {
    out.pose.heading_deg = std::fmod(pose.heading_deg + kTurnDeg + 360.f, 360.f);
  } else if (action == Action::TurnRight) {
    out.pose.heading_deg = std::fmod(pose.heading_deg - kTurnDeg + 360.f, 360.f);
  } else {
    float rad = pose.heading_deg * static_cast<float>(M_PI) / 180.f;
    float nx = pose.x + kStrideM * std::cos(rad);
    float ny = pose.y + kStrideM * std::sin(rad);
    if (!blocked(house, nx, ny)) {
      out.pose.x = nx;
      out.pose.y = ny;
    }
  }

  float d_new = goal_distance(house, out.pose, goal);
  bool was_in = in_goal_room(house, pose, goal);
  out.entered_goal = !was_in && in_goal_room(house, out.pose, goal);
  out.reward = (d_prev - d_new) - kStepPenalty + (out.entered_goal ? kGoalBonus : 0.f);
  return out;
}

float shortest_path_length(const HousePlan& house, const AgentPose& start, RoomType goal) {
  if (!house.has_room_type(goal))
    throw std::invalid_argument("shortest_path_length: goal room type not present");
  int sx = static_cast<int>(std::floor(start.x / kCellSize));
  int sy = static_cast<int>(std::floor(start.y / kCellSize));
  if (house.cell(sx, sy) != Cell::Floor)
    throw std::invalid_argument("shortest_path_length: start not on a floor cell");

  auto room_type_at = [&](int x, int y) -> int {
    int r = house.room_at(x, y);
    return r >= 0 ? static_cast<int>(house.rooms[static_cast<size_t>(r)].type) : -1;
  };
  if (room_type_at(sx, sy) == static_cast<int>(goal)) return 0.f;

  std::vector<int> dist(static_cast<size_t>(house.width) * house.height, -1);
  std::deque<std::pair<int, int>> queue;
  dist[static_cast<size_t>(sy) * house.width + sx] = 0;
  queue.emplace_back(sx, sy);
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    int d = dist[static_cast<size_t>(y) * house.width + x];
    for (int k = 0; k < 4; ++k) {
      int nx = x + dx[k], ny = y + dy[k];
      if (house.cell(nx, ny) != Cell::Floor) continue;
      auto& dn = dist[static_cast<size_t>(ny) * house.width + nx];
      if (dn >= 0) continue;
      dn = d + 1;
      if (room_type_at(nx, ny) == static_cast<int>(goal))
        return static_cast<float>(dn) * kCellSize;
      queue.emplace_back(nx, ny);
    }
  }
  throw std::runtime_error("shortest_path_length: goal unreachable (house invariant violation)");
}

Observation make_observation(const HousePlan& house, const AgentPose& pose, RoomType goal) {
  if (!house.has_room_type(goal))
    throw std::invalid_argument("observation: goal room type not present in house");
  Observation obs;
  obs.image = render_image(house, pose, house.domain);
  obs.domain = house.domain;
  obs.goal = goal;
  return obs;
}

AgentPose sample_pose(const HousePlan& house, Rng& rng, std::optional<RoomType> exclude_room) {
  for (int tries = 0; tries < 10000; ++tries) {
    int x = rng.uniform_int(1, house.width - 2);
    int y = rng.uniform_int(1, house.height - 2);
    if (house.cell(x, y) != Cell::Floor) continue;
    int r = house.room_at(x, y);
    if (r < 0) continue;  // door cells are poor spawn points
    if (exclude_room && house.rooms[static_cast<size_t>(r)].type == *exclude_room) continue;
    AgentPose pose;
    pose.x = (static_cast<float>(x) + 0.5f) * kCellSize;
    pose.y = (static_cast<float>(y) + 0.5f) * kCellSize;
    pose.heading_deg = static_cast<float>(rng.uniform_int(0, 11)) * kTurnDeg;
    return pose;
  }
  throw std::runtime_error("sample_pose: no valid pose found");
}

EpisodeSpec sample_episode(const HousePlan& house, Rng& rng, int max_steps) {
  std::vector<RoomType> present;
  for (int t = 0; t < kNumRoomTypes; ++t)
    if (house.has_room_type(static_cast<RoomType>(t))) present.push_back(static_cast<RoomType>(t));
  EpisodeSpec spec;
  spec.house_seed = house.seed;
  spec.domain = house.domain;
  spec.goal = present[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(present.size()) - 1))];
  spec.start = sample_pose(house, rng, spec.goal);
  spec.max_steps = max_steps;
  return spec;
}

}  // namespace jrt
