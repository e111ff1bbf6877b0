#pragma once

#include <string>
#include <vector>

#include "jrt/agent.hpp"

namespace jrt {

struct TrainConfig {
  Domain domain = Domain::Synthetic;
  int total_steps = 200000;  // desk scale; the reference setup runs 13.2M
  int workers = 4;
  int unroll = kUnroll;
  float lr = 7e-4f;
  float rmsprop_decay = 0.99f;
  float entropy_coeff = kEntropyCoeff;
  float gamma = kGamma;
  float grad_clip = 40.f;  // global-norm clip across one synchronous round
  uint64_t seed = 0;
  int eval_every = 0;  // env steps between log rows; 0 = total_steps / 10
  int max_episode_steps = 100;
  int eval_episodes_per_house = 2;
};

struct TrainLogRow {
  long steps = 0;
  float mean_reward = 0.f;
  float success_rate = 0.f;  // percent
  float spl = 0.f;           // percent
};

struct TrainLog {
  std::vector<TrainLogRow> rows;
};

/// CSV columns: steps,mean_reward,success_rate,spl
void save_train_log(const TrainLog& log, const std::string& path);

struct EvalSummary {
  float success_rate = 0.f;  // percent
  float spl = 0.f;           // percent
  float mean_reward = 0.f;
};

/// Greedy-argmax rollouts on sampled episodes; the trainer's cadence metric.
EvalSummary eval_greedy(ParamSet& ps, const std::vector<HousePlan>& houses,
                        int episodes_per_house, uint64_t seed, int max_steps);

struct TrainResult {
  ParamSet params;
  TrainLog log;
};

/// Synchronous actor-critic training: round-robin workers collect unrolls in a
/// fixed order, gradients are summed and applied once per round (RMSProp).
/// Single-threaded, so results are bitwise deterministic in the config.
TrainResult train_baseline(const TrainConfig& cfg, const std::vector<HousePlan>& train_houses,
                           const std::vector<HousePlan>& val_houses);

/// Continues training all parameters from an existing bundle; the step counter
/// carries on from the source's `meta.steps`.
TrainResult finetune(const ParamSet& source, const TrainConfig& cfg,
                     const std::vector<HousePlan>& train_houses,
                     const std::vector<HousePlan>& val_houses);

}  // namespace jrt
