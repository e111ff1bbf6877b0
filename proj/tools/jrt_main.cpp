// jrt: command-line front end over the library. Every subcommand is a thin
// wrapper; all randomness flows from --seed.
#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "jrt/banks.hpp"
#include "jrt/checkpoint.hpp"
#include "jrt/harness.hpp"

using namespace jrt;

namespace {

Domain parse_domain(const std::string& s) {
  if (s == "syn") return Domain::Synthetic;
  if (s == "real") return Domain::Real;
  throw CLI::ValidationError("--domain", "expected 'syn' or 'real'");
}

PipelineConfig resolve_config(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
  PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
  std::string patch;
  for (const auto& kv : overrides) patch += kv + "\n";
  if (!patch.empty()) {
    // re-serialize so overrides land on top of the loaded values
    cfg = parse_config(serialize_config(cfg) + patch);
  }
  return cfg;
}

std::vector<float> parse_floats(const std::string& csv) {
  std::vector<float> out;
  size_t pos = 0;
  while (pos < csv.size()) {
    size_t comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    out.push_back(std::stof(csv.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

void print_report(const char* label, const EvalReport& r) {
  std::printf("%s: success %.2f%%  spl %.2f%%  (%zu episodes)\n", label, r.success_rate, r.spl,
              r.episodes.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sim-real joint reinforcement transfer for indoor navigation"};
  app.require_subcommand(1);

  // gen-houses
  auto* gen = app.add_subcommand("gen-houses", "generate a house bank");
  std::string g_domain = "syn", g_split = "train", g_out;
  int g_count = 24;
  uint64_t g_seed = 0;
  gen->add_option("--domain", g_domain, "syn|real");
  gen->add_option("--split", g_split, "train|val|test (seed stream tag)");
  gen->add_option("--count", g_count)->check(CLI::PositiveNumber);
  gen->add_option("--seed", g_seed);
  gen->add_option("--out", g_out)->required();

  // sample-images
  auto* smp = app.add_subcommand("sample-images", "render an image bank from a house bank");
  std::string s_houses, s_out, s_domain;
  int s_count = 256;
  uint64_t s_seed = 0;
  smp->add_option("--houses", s_houses)->required();
  smp->add_option("--domain", s_domain, "syn|real, validated against the bank");
  smp->add_option("--count", s_count)->check(CLI::PositiveNumber);
  smp->add_option("--seed", s_seed);
  smp->add_option("--out", s_out)->required();

  // train
  auto* trn = app.add_subcommand("train", "actor-critic training (baseline or fine-tune)");
  std::string t_houses, t_val, t_init, t_out, t_log;
  TrainConfig t_cfg;
  std::string t_domain = "syn";
  trn->add_option("--houses", t_houses)->required();
  trn->add_option("--val-houses", t_val)->required();
  trn->add_option("--domain", t_domain, "syn|real");
  trn->add_option("--steps", t_cfg.total_steps)->check(CLI::PositiveNumber);
  trn->add_option("--workers", t_cfg.workers)->check(CLI::PositiveNumber);
  trn->add_option("--lr", t_cfg.lr);
  trn->add_option("--gamma", t_cfg.gamma);
  trn->add_option("--entropy", t_cfg.entropy_coeff);
  trn->add_option("--max-episode-steps", t_cfg.max_episode_steps);
  trn->add_option("--seed", t_cfg.seed);
  trn->add_option("--init", t_init, "checkpoint to continue from (fine-tuning)");
  trn->add_option("--out", t_out)->required();
  trn->add_option("--log", t_log, "training-curve CSV");

  // adapt
  auto* adp = app.add_subcommand("adapt", "adversarial feature adaptation of the encoder");
  std::string a_ckpt, a_sim, a_real, a_out, a_log;
  AdaptConfig a_cfg;
  adp->add_option("--ckpt", a_ckpt, "synthetic baseline checkpoint")->required();
  adp->add_option("--sim-images", a_sim)->required();
  adp->add_option("--real-images", a_real)->required();
  adp->add_option("--iters", a_cfg.iters)->check(CLI::PositiveNumber);
  adp->add_option("--idt", a_cfg.idt);
  adp->add_option("--norm", a_cfg.norm);
  adp->add_option("--lr", a_cfg.lr);
  adp->add_option("--batch", a_cfg.batch);
  adp->add_option("--seed", a_cfg.seed);
  adp->add_option("--out", a_out)->required();
  adp->add_option("--log", a_log, "loss-curve CSV");

  // mimic
  auto* mim = app.add_subcommand("mimic", "policy mimic on real houses, encoder frozen");
  std::string m_student, m_teacher, m_houses, m_val, m_out, m_log;
  MimicConfig m_cfg;
  m_cfg.rl.domain = Domain::Real;
  mim->add_option("--student", m_student, "checkpoint providing the frozen encoder")->required();
  mim->add_option("--teacher", m_teacher, "synthetic baseline checkpoint")->required();
  mim->add_option("--houses", m_houses)->required();
  mim->add_option("--val-houses", m_val)->required();
  mim->add_option("--steps", m_cfg.rl.total_steps)->check(CLI::PositiveNumber);
  mim->add_option("--lambda", m_cfg.lambda, "mimic-loss weight");
  mim->add_option("--max-episode-steps", m_cfg.rl.max_episode_steps);
  mim->add_option("--seed", m_cfg.rl.seed);
  mim->add_option("--out", m_out)->required();
  mim->add_option("--log", m_log);

  // eval
  auto* evl = app.add_subcommand("eval", "greedy evaluation over a fixed episode set");
  std::string e_ckpt, e_houses, e_out;
  int e_per_house = 10, e_max_steps = 200;
  uint64_t e_seed = 0;
  evl->add_option("--ckpt", e_ckpt)->required();
  evl->add_option("--houses", e_houses, "test house bank")->required();
  evl->add_option("--per-house", e_per_house)->check(CLI::PositiveNumber);
  evl->add_option("--max-steps", e_max_steps)->check(CLI::PositiveNumber);
  evl->add_option("--seed", e_seed);
  evl->add_option("--out", e_out, "per-episode CSV");

  // heatmap
  auto* hmp = app.add_subcommand("heatmap", "conv-activation map of one bank image as PGM");
  std::string h_ckpt, h_images, h_out;
  int h_index = 0;
  hmp->add_option("--ckpt", h_ckpt)->required();
  hmp->add_option("--images", h_images, "image bank")->required();
  hmp->add_option("--index", h_index, "image index in the bank");
  hmp->add_option("--out", h_out)->required();

  // pipeline / sweep
  std::string p_config;
  std::vector<std::string> p_set;
  auto* pip = app.add_subcommand("pipeline", "full multi-seed run: baselines, FA, PM, eval");
  pip->add_option("--config", p_config, "key = value file");
  pip->add_option("--set", p_set, "override, e.g. --set sim_steps=50000")->take_all();

  std::string w_config, w_param, w_values, w_seeds;
  std::vector<std::string> w_set;
  auto* swp = app.add_subcommand("sweep", "ablation sweep over idt_weight or mimic_weight");
  swp->add_option("--config", w_config, "base pipeline config");
  swp->add_option("--param", w_param, "idt_weight|mimic_weight")->required();
  swp->add_option("--values", w_values, "comma-separated values")->required();
  swp->add_option("--seeds", w_seeds, "comma-separated, default: the config's");
  swp->add_option("--set", w_set, "config override")->take_all();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      save_house_bank(generate_houses(parse_domain(g_domain), g_count, g_seed, g_split), g_out);
      std::printf("wrote %d %s/%s houses to %s\n", g_count, g_domain.c_str(), g_split.c_str(),
                  g_out.c_str());
    } else if (*smp) {
      auto houses = load_house_bank(s_houses);
      if (!s_domain.empty() && !houses.empty() && houses[0].domain != parse_domain(s_domain))
        throw std::runtime_error("sample-images: bank domain does not match --domain");
      save_image_bank(sample_images(houses, s_count, s_seed), s_out);
      std::printf("wrote %d images to %s\n", s_count, s_out.c_str());
    } else if (*trn) {
      t_cfg.domain = parse_domain(t_domain);
      auto houses = load_house_bank(t_houses);
      auto val = load_house_bank(t_val);
      TrainResult r = t_init.empty()
                          ? train_baseline(t_cfg, houses, val)
                          : finetune(load_checkpoint(t_init), t_cfg, houses, val);
      save_checkpoint(r.params, t_out);
      if (!t_log.empty()) save_train_log(r.log, t_log);
      if (!r.log.rows.empty())
        std::printf("final: success %.2f%%  spl %.2f%%\n", r.log.rows.back().success_rate,
                    r.log.rows.back().spl);
    } else if (*adp) {
      AdaptResult r = adapt(load_checkpoint(a_ckpt), load_image_bank(a_sim),
                            load_image_bank(a_real), a_cfg);
      save_checkpoint(r.params, a_out);
      if (!a_log.empty()) save_adapt_log(r.log, a_log);
      std::printf("adapted encoder written to %s\n", a_out.c_str());
    } else if (*mim) {
      MimicResult r = mimic_train(load_checkpoint(m_student), load_checkpoint(m_teacher), m_cfg,
                                  load_house_bank(m_houses), load_house_bank(m_val));
      save_checkpoint(r.params, m_out);
      if (!m_log.empty()) save_mimic_log(r.log, m_log);
    } else if (*evl) {
      ParamSet model = load_checkpoint(e_ckpt);
      EpisodeSet set =
          make_episode_set(load_house_bank(e_houses), e_per_house, e_seed, e_max_steps);
      EvalReport r = evaluate(model, set);
      r.seed = e_seed;
      if (!e_out.empty()) save_eval_report(r, e_out);
      print_report(e_ckpt.c_str(), r);
    } else if (*hmp) {
      ParamSet model = load_checkpoint(h_ckpt);
      auto images = load_image_bank(h_images);
      if (h_index < 0 || h_index >= static_cast<int>(images.size()))
        throw std::runtime_error("heatmap: --index out of range");
      save_pgm(heatmap(model, images[static_cast<size_t>(h_index)]), h_out);
      std::printf("wrote %s\n", h_out.c_str());
    } else if (*pip) {
      PipelineConfig cfg = resolve_config(p_config, p_set);
      PipelineOutcome r = run_pipeline(cfg);
      std::printf("stages run: %d\n", r.stages_run);
      for (const auto& row : r.table)
        std::printf("%-13s %5.2f +- %.2f  (spl %5.2f +- %.2f, %d seeds)\n", row.model.c_str(),
                    row.success_mean, row.success_std, row.spl_mean, row.spl_std, row.seeds);
    } else if (*swp) {
      PipelineConfig cfg = resolve_config(w_config, w_set);
      SweepSpec spec;
      spec.param = w_param;
      spec.values = parse_floats(w_values);
      if (w_seeds.empty()) {
        spec.seeds = cfg.seeds;
      } else {
        for (float v : parse_floats(w_seeds)) spec.seeds.push_back(static_cast<uint64_t>(v));
      }
      SweepOutcome r = run_sweep(spec, cfg);
      for (const auto& row : r.summary)
        std::printf("%s=%-10s %5.2f +- %.2f  (spl %5.2f +- %.2f, %d seeds)\n", w_param.c_str(),
                    row.model.c_str(), row.success_mean, row.success_std, row.spl_mean,
                    row.spl_std, row.seeds);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
