#pragma once

#include <string>
#include <vector>

#include "jrt/agent.hpp"

namespace jrt {

/// Fixed set of evaluation episodes, reusable across every model under
/// comparison. `house_index` points into `houses`.
struct EpisodeSet {
  std::vector<HousePlan> houses;
  std::vector<int> house_index;
  std::vector<EpisodeSpec> specs;
};

/// Default 10 episodes per test house, drawn once from the set seed.
EpisodeSet make_episode_set(std::vector<HousePlan> houses, int per_house, uint64_t seed,
                            int max_steps = kDefaultMaxSteps);

struct EpisodeRecord {
  int episode_id = 0;
  bool success = false;
  float path_len = 0.f;      // realized displacement, meters
  float shortest_len = 0.f;  // geodesic, meters
  int steps = 0;
};

struct EvalReport {
  std::vector<EpisodeRecord> episodes;
  float success_rate = 0.f;  // percent
  float spl = 0.f;           // percent, (1/N) sum S_i l_i / max(p_i, l_i) * 100
  uint64_t seed = 0;
};

/// Recompute the aggregate percentages from the per-episode records:
/// success = (1/N) sum S_i * 100, SPL = (1/N) sum S_i l_i / max(p_i, l_i) * 100.
void compute_aggregates(EvalReport& report);

/// Greedy (argmax, ties to the lowest action index) rollout of the model over
/// the episode set. Deterministic: same checkpoint + set -> identical report.
EvalReport evaluate(ParamSet& model, const EpisodeSet& set);

/// Per-episode CSV: `episode_id,success,path_len,shortest_len,steps`.
void save_eval_report(const EvalReport& report, const std::string& path);

/// One aggregate line per (model, seed) pair.
struct AggregateRow {
  std::string model;
  uint64_t seed = 0;
  float success_rate = 0.f;
  float spl = 0.f;
};

/// Aggregate CSV: `model,seed,success_rate,spl`.
void save_aggregates(const std::vector<AggregateRow>& rows, const std::string& path);
std::vector<AggregateRow> load_aggregates(const std::string& path);

struct CompareRow {
  std::string model;
  int seeds = 0;
  float success_mean = 0.f, success_std = 0.f;
  float spl_mean = 0.f, spl_std = 0.f;
};

/// Across-seed mean and (population) standard deviation per model, in first-
/// appearance order of the model labels.
std::vector<CompareRow> compare(const std::vector<AggregateRow>& rows);

/// Comparison CSV: `model,seeds,success_mean,success_std,spl_mean,spl_std`.
void save_compare(const std::vector<CompareRow>& rows, const std::string& path);

/// Mean absolute activation of the last convolution layer over one {3,32,32}
/// observation, min-max normalized to [0,1] (constant maps normalize to 0.5).
/// Returns the {6,6} spatial grid for the default encoder.
Tensor heatmap(ParamSet& model, const Tensor& image);

/// Binary portable graymap (P5, maxval 255) of a {H,W} tensor in [0,1].
void save_pgm(const Tensor& map, const std::string& path);

}  // namespace jrt
