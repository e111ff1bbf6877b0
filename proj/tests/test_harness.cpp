#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "jrt/checkpoint.hpp"
#include "jrt/harness.hpp"

using namespace jrt;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const char* name) {
  fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p.string();
}

std::string file_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// budgets small enough that the whole pipeline runs in seconds
PipelineConfig tiny_config(const std::string& out_dir) {
  PipelineConfig cfg;
  cfg.out_dir = out_dir;
  cfg.seeds = {5};
  cfg.train_houses = 2;
  cfg.val_houses = 1;
  cfg.test_houses = 1;
  cfg.eval_per_house = 2;
  cfg.workers = 2;
  cfg.sim_steps = 400;
  cfg.real_steps = 400;
  cfg.ft_steps = 200;
  cfg.mimic_steps = 200;
  cfg.sim_max_episode_steps = 30;
  cfg.real_max_episode_steps = 30;
  cfg.adapt_images = 16;
  cfg.adapt_iters = 5;
  cfg.adapt_batch = 4;
  return cfg;
}

}  // namespace

TEST_CASE("config serialization round-trips and rejects unknown keys") {
  PipelineConfig cfg;
  cfg.out_dir = "somewhere/else";
  cfg.seeds = {7, 11};
  cfg.idt_weight = 5e-6f;
  cfg.mimic_steps = 1234;

  std::string text = serialize_config(cfg);
  PipelineConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(back.out_dir == "somewhere/else");
  REQUIRE(back.seeds.size() == 2);
  CHECK(back.seeds[1] == 11);
  CHECK(back.idt_weight == cfg.idt_weight);
  CHECK(back.mimic_steps == 1234);

  // comments and blank lines are ignored; later lines override earlier ones
  PipelineConfig sparse = parse_config("# a comment\n\nlr = 0.001\nlr = 0.002\n");
  CHECK(sparse.lr == doctest::Approx(0.002f));
  CHECK(sparse.gamma == PipelineConfig{}.gamma);

  CHECK_THROWS(parse_config("no_such_knob = 3\n"));
  CHECK_THROWS(parse_config("just some words\n"));
  CHECK_THROWS(parse_config("seeds = \n"));
}

TEST_CASE("config hash tracks content") {
  PipelineConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  b.lr = 1e-3f;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.seeds = {9};
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("load_config reads a file; run_dir embeds the seed") {
  PipelineConfig cfg;
  cfg.out_dir = "x";
  std::string path = (fs::temp_directory_path() / "jrt_cfg.txt").string();
  std::ofstream(path) << serialize_config(cfg);
  PipelineConfig loaded = load_config(path);
  CHECK(serialize_config(loaded) == serialize_config(cfg));
  fs::remove(path);

  CHECK(run_dir(cfg, 1) == "x/seed_1");
  CHECK(run_dir(cfg, 2) == "x/seed_2");
  CHECK(run_dir(cfg, 1) != run_dir(cfg, 3));
}

TEST_CASE("pipeline: artifacts, six rows, resume runs nothing") {
  std::string out = fresh_dir("jrt_harness_pipe");
  PipelineConfig cfg = tiny_config(out);

  PipelineOutcome first = run_pipeline(cfg);
  CHECK(first.stages_run == 9);  // gen, 3 trainers, images, adapt, 2 mimics, eval
  REQUIRE(first.rows.size() == 6);
  std::vector<std::string> want = {"sim baseline", "real baseline", "sim+FT",
                                   "sim+FA",       "sim+PM",        "sim+FA+PM"};
  for (size_t i = 0; i < want.size(); ++i) {
    CHECK(first.rows[i].model == want[i]);
    CHECK(first.rows[i].seed == 5);
    CHECK(first.rows[i].success_rate >= 0.f);
    CHECK(first.rows[i].spl <= first.rows[i].success_rate + 1e-4f);
  }
  REQUIRE(first.table.size() == 6);
  CHECK(first.table[0].seeds == 1);

  std::string dir = run_dir(cfg, 5);
  for (const char* f :
       {"syn_train.bank", "real_test.bank", "sim.ckpt", "real.ckpt", "ft.ckpt", "fa.ckpt",
        "pm.ckpt", "fapm.ckpt", "syn.imgs", "real.imgs", "adapt.csv", "sim_train.csv",
        "fapm_train.csv", "eval_sim.csv", "aggregates.csv", "config.resolved", "MANIFEST"})
    CHECK(fs::exists(dir + "/" + std::string(f)));
  CHECK(fs::exists(out + "/compare.csv"));
  CHECK(fs::exists(out + "/aggregates.csv"));

  // the resolved config re-parses to the exact same configuration
  PipelineConfig resolved = load_config(dir + "/config.resolved");
  CHECK(serialize_config(resolved) == serialize_config(cfg));
  CHECK(file_text(dir + "/MANIFEST").find("config_hash") == 0);

  // resume: outputs exist, so no stage runs and the rows are identical
  std::string sim_bytes = file_bytes(dir + "/sim.ckpt");
  PipelineOutcome second = run_pipeline(cfg);
  CHECK(second.stages_run == 0);
  REQUIRE(second.rows.size() == first.rows.size());
  for (size_t i = 0; i < first.rows.size(); ++i) {
    CHECK(second.rows[i].success_rate == first.rows[i].success_rate);
    CHECK(second.rows[i].spl == first.rows[i].spl);
  }
  CHECK(file_bytes(dir + "/sim.ckpt") == sim_bytes);

  SUBCASE("sweep at the base value reproduces the base row exactly") {
    SweepSpec spec{"mimic_weight", {cfg.mimic_weight}, {5}};
    SweepOutcome sw = run_sweep(spec, cfg);
    REQUIRE(sw.rows.size() == 1);
    CHECK(sw.rows[0].success_rate == first.rows[5].success_rate);  // sim+FA+PM
    CHECK(sw.rows[0].spl == first.rows[5].spl);
    CHECK(fs::exists(out + "/sweep_mimic_weight.csv"));
    std::string text = file_text(out + "/sweep_mimic_weight.csv");
    CHECK(text.rfind("param_value,seed,success_rate,spl\n", 0) == 0);
    CHECK(file_text(out + "/sweep_mimic_weight_summary.csv")
              .rfind("param_value,seeds,success_mean,success_std,spl_mean,spl_std\n", 0) == 0);
  }

  SUBCASE("idt sweep recomputes adaptation per value") {
    SweepSpec spec{"idt_weight", {0.f, cfg.idt_weight}, {5}};
    SweepOutcome sw = run_sweep(spec, cfg);
    REQUIRE(sw.rows.size() == 2);
    CHECK(sw.rows[0].value == 0.f);
    CHECK(sw.rows[1].value == cfg.idt_weight);
    // the base value reuses fa.ckpt, hence matches the pipeline's sim+FA row
    CHECK(sw.rows[1].success_rate == first.rows[3].success_rate);
    REQUIRE(sw.summary.size() == 2);
    CHECK(sw.summary[0].seeds == 1);
  }

  fs::remove_all(out);
}

TEST_CASE("sweep input validation and missing-artifact diagnostics") {
  PipelineConfig cfg = tiny_config(fresh_dir("jrt_harness_sweep"));
  CHECK_THROWS(run_sweep({"gamma", {0.1f}, {5}}, cfg));
  CHECK_THROWS(run_sweep({"idt_weight", {}, {5}}, cfg));
  CHECK_THROWS(run_sweep({"idt_weight", {0.1f}, {}}, cfg));
  CHECK_THROWS(run_sweep({"idt_weight", {0.1f, 0.1f}, {5}}, cfg));
  CHECK_THROWS(run_sweep({"idt_weight", {-1.f}, {5}}, cfg));

  // no base pipeline artifacts: the failure carries the sweep stage tag
  try {
    run_sweep({"idt_weight", {0.1f}, {5}}, cfg);
    CHECK(false);
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("sweep-idt_weight") != std::string::npos);
    CHECK(std::string(e.what()).find("seed 5") != std::string::npos);
  }
}
