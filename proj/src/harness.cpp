#include "jrt/harness.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "jrt/banks.hpp"
#include "jrt/checkpoint.hpp"

namespace fs = std::filesystem;

namespace jrt {

namespace {

// seed-derivation tags: one fixed stream per artifact kind
constexpr uint64_t kTagSynTrain = 10, kTagSynVal = 11, kTagSynTest = 12;
constexpr uint64_t kTagRealTrain = 20, kTagRealVal = 21, kTagRealTest = 22;
constexpr uint64_t kTagSynImgs = 30, kTagRealImgs = 31;
constexpr uint64_t kTagEpisodes = 40;

std::string fmt_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Field {
  const char* key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

std::vector<Field> config_fields() {
  auto int_field = [](const char* key, int PipelineConfig::*m) {
    return Field{key, [m](const PipelineConfig& c) { return std::to_string(c.*m); },
                 [m](PipelineConfig& c, const std::string& v) { c.*m = std::stoi(v); }};
  };
  auto float_field = [](const char* key, float PipelineConfig::*m) {
    return Field{key, [m](const PipelineConfig& c) { return fmt_float(c.*m); },
                 [m](PipelineConfig& c, const std::string& v) { c.*m = std::stof(v); }};
  };
  std::vector<Field> f;
  f.push_back({"out_dir", [](const PipelineConfig& c) { return c.out_dir; },
               [](PipelineConfig& c, const std::string& v) { c.out_dir = v; }});
  f.push_back({"seeds",
               [](const PipelineConfig& c) {
                 std::string out;
                 for (size_t i = 0; i < c.seeds.size(); ++i)
                   out += (i ? "," : "") + std::to_string(c.seeds[i]);
                 return out;
               },
               [](PipelineConfig& c, const std::string& v) {
                 c.seeds.clear();
                 std::stringstream ss(v);
                 std::string tok;
                 while (std::getline(ss, tok, ','))
                   c.seeds.push_back(std::stoull(trim(tok)));
                 if (c.seeds.empty()) throw std::invalid_argument("config: empty seed list");
               }});
  f.push_back(int_field("train_houses", &PipelineConfig::train_houses));
  f.push_back(int_field("val_houses", &PipelineConfig::val_houses));
  f.push_back(int_field("test_houses", &PipelineConfig::test_houses));
  f.push_back(int_field("eval_per_house", &PipelineConfig::eval_per_house));
  f.push_back(int_field("workers", &PipelineConfig::workers));
  f.push_back(float_field("lr", &PipelineConfig::lr));
  f.push_back(float_field("gamma", &PipelineConfig::gamma));
  f.push_back(float_field("entropy", &PipelineConfig::entropy));
  f.push_back(float_field("grad_clip", &PipelineConfig::grad_clip));
  f.push_back(int_field("sim_steps", &PipelineConfig::sim_steps));
  f.push_back(int_field("real_steps", &PipelineConfig::real_steps));
  f.push_back(int_field("ft_steps", &PipelineConfig::ft_steps));
  f.push_back(int_field("mimic_steps", &PipelineConfig::mimic_steps));
  f.push_back(int_field("sim_max_episode_steps", &PipelineConfig::sim_max_episode_steps));
  f.push_back(int_field("real_max_episode_steps", &PipelineConfig::real_max_episode_steps));
  f.push_back(int_field("adapt_images", &PipelineConfig::adapt_images));
  f.push_back(float_field("idt_weight", &PipelineConfig::idt_weight));
  f.push_back(float_field("norm_weight", &PipelineConfig::norm_weight));
  f.push_back(float_field("adapt_lr", &PipelineConfig::adapt_lr));
  f.push_back(int_field("adapt_iters", &PipelineConfig::adapt_iters));
  f.push_back(int_field("adapt_batch", &PipelineConfig::adapt_batch));
  f.push_back(float_field("mimic_weight", &PipelineConfig::mimic_weight));
  return f;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

bool all_exist(const std::vector<std::string>& paths) {
  for (const auto& p : paths)
    if (!fs::exists(p)) return false;
  return true;
}

TrainConfig rl_config(const PipelineConfig& cfg, uint64_t seed, Domain domain, int steps) {
  TrainConfig rl;
  rl.domain = domain;
  rl.total_steps = steps;
  rl.workers = cfg.workers;
  rl.lr = cfg.lr;
  rl.gamma = cfg.gamma;
  rl.entropy_coeff = cfg.entropy;
  rl.grad_clip = cfg.grad_clip;
  rl.seed = seed;
  rl.max_episode_steps =
      domain == Domain::Synthetic ? cfg.sim_max_episode_steps : cfg.real_max_episode_steps;
  rl.eval_episodes_per_house = 5;
  return rl;
}

AdaptConfig adapt_config(const PipelineConfig& cfg, uint64_t seed) {
  AdaptConfig a;
  a.idt = cfg.idt_weight;
  a.norm = cfg.norm_weight;
  a.lr = cfg.adapt_lr;
  a.iters = cfg.adapt_iters;
  a.batch = cfg.adapt_batch;
  a.seed = seed;
  return a;
}

struct StageRunner {
  uint64_t seed;
  int* counter;

  template <class Fn>
  void operator()(const char* tag, const std::vector<std::string>& outputs, Fn&& fn) const {
    if (all_exist(outputs)) return;
    try {
      fn();
    } catch (const std::exception& e) {
      throw std::runtime_error("[" + std::string(tag) + " seed " + std::to_string(seed) + "] " +
                               e.what());
    }
    ++*counter;
  }
};

void write_manifest(const std::string& dir, uint64_t hash, const std::string& seeds) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "config_hash %016" PRIx64 "\nseeds %s\n", hash, seeds.c_str());
  write_text(dir + "/MANIFEST", buf);
}

const std::vector<std::pair<std::string, std::string>>& model_files() {
  static const std::vector<std::pair<std::string, std::string>> m = {
      {"sim baseline", "sim"}, {"real baseline", "real"}, {"sim+FT", "ft"},
      {"sim+FA", "fa"},        {"sim+PM", "pm"},          {"sim+FA+PM", "fapm"}};
  return m;
}

EpisodeSet test_episodes(const PipelineConfig& cfg, const std::string& dir, uint64_t seed) {
  auto test = load_house_bank(dir + "/real_test.bank");
  return make_episode_set(std::move(test), cfg.eval_per_house, hash2(seed, kTagEpisodes),
                          cfg.real_max_episode_steps);
}

}  // namespace

std::string serialize_config(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& f : config_fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string val = trim(t.substr(eq + 1));
    bool found = false;
    for (const auto& f : config_fields())
      if (key == f.key) {
        f.set(cfg, val);
        found = true;
        break;
      }
    if (!found) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_config(text);
}

uint64_t config_hash(const PipelineConfig& cfg) {
  std::string text = serialize_config(cfg);
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string run_dir(const PipelineConfig& cfg, uint64_t seed) {
  return cfg.out_dir + "/seed_" + std::to_string(seed);
}

PipelineOutcome run_pipeline(const PipelineConfig& cfg) {
  PipelineOutcome out;
  uint64_t hash = config_hash(cfg);
  std::string seeds_str;
  for (size_t i = 0; i < cfg.seeds.size(); ++i)
    seeds_str += (i ? "," : "") + std::to_string(cfg.seeds[i]);

  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir + "/config.resolved", serialize_config(cfg));
  write_manifest(cfg.out_dir, hash, seeds_str);

  for (uint64_t seed : cfg.seeds) {
    std::string dir = run_dir(cfg, seed);
    fs::create_directories(dir);
    write_text(dir + "/config.resolved", serialize_config(cfg));
    write_manifest(dir, hash, std::to_string(seed));
    StageRunner stage{seed, &out.stages_run};

    stage("gen-houses",
          {dir + "/syn_train.bank", dir + "/syn_val.bank", dir + "/syn_test.bank",
           dir + "/real_train.bank", dir + "/real_val.bank", dir + "/real_test.bank"},
          [&] {
            save_house_bank(generate_houses(Domain::Synthetic, cfg.train_houses,
                                            hash2(seed, kTagSynTrain), "train"),
                            dir + "/syn_train.bank");
            save_house_bank(
                generate_houses(Domain::Synthetic, cfg.val_houses, hash2(seed, kTagSynVal), "val"),
                dir + "/syn_val.bank");
            save_house_bank(generate_houses(Domain::Synthetic, cfg.test_houses,
                                            hash2(seed, kTagSynTest), "test"),
                            dir + "/syn_test.bank");
            save_house_bank(generate_houses(Domain::Real, cfg.train_houses,
                                            hash2(seed, kTagRealTrain), "train"),
                            dir + "/real_train.bank");
            save_house_bank(
                generate_houses(Domain::Real, cfg.val_houses, hash2(seed, kTagRealVal), "val"),
                dir + "/real_val.bank");
            save_house_bank(
                generate_houses(Domain::Real, cfg.test_houses, hash2(seed, kTagRealTest), "test"),
                dir + "/real_test.bank");
          });

    stage("train-sim", {dir + "/sim.ckpt", dir + "/sim_train.csv"}, [&] {
      auto train = load_house_bank(dir + "/syn_train.bank");
      auto val = load_house_bank(dir + "/syn_val.bank");
      TrainResult r =
          train_baseline(rl_config(cfg, seed, Domain::Synthetic, cfg.sim_steps), train, val);
      save_checkpoint(r.params, dir + "/sim.ckpt");
      save_train_log(r.log, dir + "/sim_train.csv");
    });

    stage("train-real", {dir + "/real.ckpt", dir + "/real_train.csv"}, [&] {
      auto train = load_house_bank(dir + "/real_train.bank");
      auto val = load_house_bank(dir + "/real_val.bank");
      TrainResult r =
          train_baseline(rl_config(cfg, seed, Domain::Real, cfg.real_steps), train, val);
      save_checkpoint(r.params, dir + "/real.ckpt");
      save_train_log(r.log, dir + "/real_train.csv");
    });

    stage("finetune", {dir + "/ft.ckpt", dir + "/ft_train.csv"}, [&] {
      auto train = load_house_bank(dir + "/real_train.bank");
      auto val = load_house_bank(dir + "/real_val.bank");
      ParamSet sim = load_checkpoint(dir + "/sim.ckpt");
      TrainResult r = finetune(sim, rl_config(cfg, seed, Domain::Real, cfg.ft_steps), train, val);
      save_checkpoint(r.params, dir + "/ft.ckpt");
      save_train_log(r.log, dir + "/ft_train.csv");
    });

    stage("sample-images", {dir + "/syn.imgs", dir + "/real.imgs"}, [&] {
      auto syn = load_house_bank(dir + "/syn_train.bank");
      auto real = load_house_bank(dir + "/real_train.bank");
      save_image_bank(sample_images(syn, cfg.adapt_images, hash2(seed, kTagSynImgs)),
                      dir + "/syn.imgs");
      save_image_bank(sample_images(real, cfg.adapt_images, hash2(seed, kTagRealImgs)),
                      dir + "/real.imgs");
    });

    stage("adapt", {dir + "/fa.ckpt", dir + "/adapt.csv"}, [&] {
      ParamSet sim = load_checkpoint(dir + "/sim.ckpt");
      auto syn_imgs = load_image_bank(dir + "/syn.imgs");
      auto real_imgs = load_image_bank(dir + "/real.imgs");
      AdaptResult r = adapt(sim, syn_imgs, real_imgs, adapt_config(cfg, seed));
      save_checkpoint(r.params, dir + "/fa.ckpt");
      save_adapt_log(r.log, dir + "/adapt.csv");
    });

    auto mimic_stage = [&](const char* tag, const std::string& student_ckpt,
                           const std::string& out_name) {
      stage(tag, {dir + "/" + out_name + ".ckpt", dir + "/" + out_name + "_train.csv"}, [&] {
        auto train = load_house_bank(dir + "/real_train.bank");
        auto val = load_house_bank(dir + "/real_val.bank");
        ParamSet student = load_checkpoint(student_ckpt);
        ParamSet teacher = load_checkpoint(dir + "/sim.ckpt");
        MimicConfig mc;
        mc.rl = rl_config(cfg, seed, Domain::Real, cfg.mimic_steps);
        mc.lambda = cfg.mimic_weight;
        MimicResult r = mimic_train(student, teacher, mc, train, val);
        save_checkpoint(r.params, dir + "/" + out_name + ".ckpt");
        save_mimic_log(r.log, dir + "/" + out_name + "_train.csv");
      });
    };
    // "sim+PM" distills onto an unadapted copy of the sim encoder
    mimic_stage("mimic-fa", dir + "/fa.ckpt", "fapm");
    mimic_stage("mimic-sim", dir + "/sim.ckpt", "pm");

    std::vector<std::string> eval_outputs{dir + "/aggregates.csv"};
    for (const auto& [label, name] : model_files()) eval_outputs.push_back(dir + "/eval_" + name + ".csv");
    stage("eval", eval_outputs, [&] {
      EpisodeSet set = test_episodes(cfg, dir, seed);
      std::vector<AggregateRow> rows;
      for (const auto& [label, name] : model_files()) {
        ParamSet model = load_checkpoint(dir + "/" + name + ".ckpt");
        EvalReport rep = evaluate(model, set);
        rep.seed = seed;
        save_eval_report(rep, dir + "/eval_" + name + ".csv");
        rows.push_back({label, seed, rep.success_rate, rep.spl});
      }
      save_aggregates(rows, dir + "/aggregates.csv");
    });

    for (const auto& row : load_aggregates(dir + "/aggregates.csv")) out.rows.push_back(row);
  }

  // the comparison is cheap, so it is rewritten on every call; a resume then
  // refreshes it without re-running any training stage
  save_aggregates(out.rows, cfg.out_dir + "/aggregates.csv");
  out.table = compare(out.rows);
  save_compare(out.table, cfg.out_dir + "/compare.csv");
  return out;
}

SweepOutcome run_sweep(const SweepSpec& spec, const PipelineConfig& base) {
  if (spec.param != "idt_weight" && spec.param != "mimic_weight")
    throw std::invalid_argument("sweep: unknown parameter '" + spec.param + "'");
  if (spec.values.empty() || spec.seeds.empty())
    throw std::invalid_argument("sweep: empty value or seed list");
  for (size_t i = 0; i < spec.values.size(); ++i) {
    if (spec.values[i] < 0.f) throw std::invalid_argument("sweep: negative value");
    for (size_t j = i + 1; j < spec.values.size(); ++j)
      if (spec.values[i] == spec.values[j])
        throw std::invalid_argument("sweep: duplicate value");
  }
  bool idt = spec.param == "idt_weight";

  SweepOutcome out;
  std::vector<AggregateRow> labeled;
  for (float value : spec.values) {
    for (uint64_t seed : spec.seeds) {
      std::string dir = run_dir(base, seed);
      float base_value = idt ? base.idt_weight : base.mimic_weight;
      std::string base_ckpt = dir + (idt ? "/fa.ckpt" : "/fapm.ckpt");
      try {
        ParamSet model;
        if (value == base_value && fs::exists(base_ckpt)) {
          model = load_checkpoint(base_ckpt);  // the base pipeline already ran this point
        } else if (idt) {
          ParamSet sim = load_checkpoint(dir + "/sim.ckpt");
          auto syn_imgs = load_image_bank(dir + "/syn.imgs");
          auto real_imgs = load_image_bank(dir + "/real.imgs");
          AdaptConfig ac = adapt_config(base, seed);
          ac.idt = value;
          model = adapt(sim, syn_imgs, real_imgs, ac).params;
        } else {
          auto train = load_house_bank(dir + "/real_train.bank");
          auto val = load_house_bank(dir + "/real_val.bank");
          ParamSet student = load_checkpoint(dir + "/fa.ckpt");
          ParamSet teacher = load_checkpoint(dir + "/sim.ckpt");
          MimicConfig mc;
          mc.rl = rl_config(base, seed, Domain::Real, base.mimic_steps);
          mc.lambda = value;
          model = mimic_train(student, teacher, mc, train, val).params;
        }
        EpisodeSet set = test_episodes(base, dir, seed);
        EvalReport rep = evaluate(model, set);
        out.rows.push_back({value, seed, rep.success_rate, rep.spl});
        labeled.push_back({fmt_float(value), seed, rep.success_rate, rep.spl});
      } catch (const std::exception& e) {
        throw std::runtime_error("[sweep-" + spec.param + " seed " + std::to_string(seed) + "] " +
                                 e.what());
      }
    }
  }
  out.summary = compare(labeled);

  fs::create_directories(base.out_dir);
  std::string path = base.out_dir + "/sweep_" + spec.param + ".csv";
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("sweep: cannot open " + path);
  std::fprintf(f, "param_value,seed,success_rate,spl\n");
  for (const auto& r : out.rows)
    std::fprintf(f, "%s,%" PRIu64 ",%.4f,%.4f\n", fmt_float(r.value).c_str(), r.seed,
                 static_cast<double>(r.success_rate), static_cast<double>(r.spl));
  std::fclose(f);

  std::string sum_path = base.out_dir + "/sweep_" + spec.param + "_summary.csv";
  f = std::fopen(sum_path.c_str(), "w");
  if (!f) throw std::runtime_error("sweep: cannot open " + sum_path);
  std::fprintf(f, "param_value,seeds,success_mean,success_std,spl_mean,spl_std\n");
  for (const auto& r : out.summary)
    std::fprintf(f, "%s,%d,%.4f,%.4f,%.4f,%.4f\n", r.model.c_str(), r.seeds,
                 static_cast<double>(r.success_mean), static_cast<double>(r.success_std),
                 static_cast<double>(r.spl_mean), static_cast<double>(r.spl_std));
  std::fclose(f);
  return out;
}

}  // namespace jrt
