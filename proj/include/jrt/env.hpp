#pragma once

#include <optional>

#include "jrt/render.hpp"

namespace jrt {

enum class Action : uint8_t { TurnLeft = 0, TurnRight = 1, Forward = 2 };
constexpr int kNumActions = 3;

constexpr float kTurnDeg = 30.f;
constexpr float kStrideM = 0.25f;
constexpr float kAgentRadius = 0.05f;
constexpr float kStepPenalty = 0.01f;
constexpr float kGoalBonus = 1.0f;
constexpr int kDefaultMaxSteps = 500;

struct EpisodeSpec {
  uint64_t house_seed = 0;
  Domain domain = Domain::Synthetic;
  AgentPose start;
  RoomType goal = RoomType::Bedroom;
  int max_steps = kDefaultMaxSteps;
};

struct StepOut {
  AgentPose pose;
  float reward = 0.f;
  bool entered_goal = false;
};

/// Euclidean distance (meters) from a pose to the nearest goal-type room
/// centroid; the quantity the reward shaping tracks.
float goal_distance(const HousePlan& house, const AgentPose& pose, RoomType goal);

bool in_goal_room(const HousePlan& house, const AgentPose& pose, RoomType goal);

/// One POMDP transition. Turns rotate by 30 degrees; Forward advances 0.25 m
/// unless a wall is within the agent radius (a legal no-op). Reward is
/// (d_prev - d_new) - 0.01 plus +1 on entering the goal room.
StepOut env_step(const HousePlan& house, const AgentPose& pose, Action action, RoomType goal);

/// Geodesic distance (meters) over the 4-connected floor-cell graph from the
/// start cell to the nearest cell of the goal room type. Throws if
/// unreachable.
float shortest_path_length(const HousePlan& house, const AgentPose& start, RoomType goal);

Observation make_observation(const HousePlan& house, const AgentPose& pose, RoomType goal);

/// Cell-center pose in a uniformly sampled floor cell, random 30-degree
/// heading; optionally excludes cells whose room type equals a given one.
AgentPose sample_pose(const HousePlan& house, Rng& rng,
                      std::optional<RoomType> exclude_room = std::nullopt);

/// Start outside a randomly chosen goal room type that exists in the house.
EpisodeSpec sample_episode(const HousePlan& house, Rng& rng, int max_steps = kDefaultMaxSteps);

/// Stateful wrapper used by the trainers and the evaluator.
struct Episode {
  const HousePlan* house = nullptr;
  EpisodeSpec spec;
  AgentPose pose;
  int steps = 0;
  bool done = false;
  bool success = false;
  float path_len = 0.f;  // realized displacement, meters
  float total_reward = 0.f;

  void reset(const HousePlan& h, const EpisodeSpec& s) {
    house = &h;
    spec = s;
    pose = s.start;
    steps = 0;
    done = false;
    success = false;
    path_len = 0.f;
    total_reward = 0.f;
  }

  Observation observe() const { return make_observation(*house, pose, spec.goal); }

  float act(Action a) {
    if (done) throw std::logic_error("episode: step after done");
    AgentPose before = pose;
    StepOut out = env_step(*house, pose, a, spec.goal);
    pose = out.pose;
    path_len += std::hypot(pose.x - before.x, pose.y - before.y);
    steps += 1;
    total_reward += out.reward;
    if (out.entered_goal) {
      done = true;
      success = true;
    } else if (steps >= spec.max_steps) {
      done = true;
    }
    return out.reward;
  }
};

}  // namespace jrt
