#pragma once

#include <string>
#include <vector>

#include "jrt/evalkit.hpp"
#include "jrt/fadapt.hpp"
#include "jrt/pmimic.hpp"

namespace jrt {

/// Every knob of the full three-stage run, loadable from a line-oriented
/// `key = value` file (`#` comments allowed, unknown keys rejected). Defaults
/// are the desk-scale budget: 24/8/8 houses per domain, 3 seeds.
struct PipelineConfig {
  std::string out_dir = "runs";
  std::vector<uint64_t> seeds{1, 2, 3};

  int train_houses = 24, val_houses = 8, test_houses = 8;
  int eval_per_house = 10;

  // actor-critic stages
  int workers = 4;
  float lr = 7e-4f;
  float gamma = 0.95f;
  float entropy = 0.02f;
  float grad_clip = 40.f;
  int sim_steps = 100000;
  int real_steps = 100000;
  int ft_steps = 50000;
  int mimic_steps = 50000;
  int sim_max_episode_steps = 150;
  int real_max_episode_steps = 200;

  // feature adaptation
  int adapt_images = 256;
  float idt_weight = 5e-4f;
  float norm_weight = 1e-4f;
  float adapt_lr = 1e-4f;
  int adapt_iters = 1000;
  int adapt_batch = 64;

  // policy mimic
  float mimic_weight = 0.1f;
};

/// Canonical `key = value` text, one line per field, fixed order.
std::string serialize_config(const PipelineConfig& cfg);

/// Parse the serialized form; throws on unknown keys or malformed lines.
PipelineConfig parse_config(const std::string& text);

PipelineConfig load_config(const std::string& path);

/// FNV-1a over the canonical serialization; the traceability tag written next
/// to every CSV the pipeline emits.
uint64_t config_hash(const PipelineConfig& cfg);

/// `<out_dir>/seed_<seed>`; all of one seed's artifacts live under it.
std::string run_dir(const PipelineConfig& cfg, uint64_t seed);

struct PipelineOutcome {
  std::vector<AggregateRow> rows;  // six Table-1 rows per seed
  std::vector<CompareRow> table;   // across-seed means
  int stages_run = 0;              // stages executed this call (0 on a resume)
};

/// Full run per seed: generate house banks (both domains, three splits), train
/// the sim and real baselines, fine-tune sim on real, sample image banks,
/// adapt the encoder (FA), mimic on top of FA and on an unadapted copy (PM),
/// evaluate all six variants on the shared real test episode set, then write
/// the across-seed comparison. A stage whose output files already exist is
/// skipped, so re-running a completed tree performs no work; a failing stage
/// throws with a `[stage seed]` tag. The resolved config (with its hash) is
/// written into every run directory.
PipelineOutcome run_pipeline(const PipelineConfig& cfg);

struct SweepSpec {
  std::string param;          // "idt_weight" or "mimic_weight"
  std::vector<float> values;  // distinct, >= 0
  std::vector<uint64_t> seeds;
};

struct SweepRow {
  float value = 0.f;
  uint64_t seed = 0;
  float success_rate = 0.f;
  float spl = 0.f;
};

struct SweepOutcome {
  std::vector<SweepRow> rows;
  std::vector<CompareRow> summary;  // one row per value: mean +- std across seeds
};

/// Ablation sweep over one parameter, reusing the base pipeline's upstream
/// artifacts (checkpoints, banks, episode seeds). `idt_weight` re-runs
/// adaptation and evaluates sim+FA; `mimic_weight` re-runs the mimic stage on
/// the base FA checkpoint and evaluates sim+FA+PM. A value equal to the base
/// config's reproduces the base number exactly. Emits
/// `<out_dir>/sweep_<param>.csv` (`param_value,seed,success_rate,spl`) and a
/// mean/std summary CSV beside it.
SweepOutcome run_sweep(const SweepSpec& spec, const PipelineConfig& base);

}  // namespace jrt
