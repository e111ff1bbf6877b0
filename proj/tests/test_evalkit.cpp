#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "jrt/banks.hpp"
#include "jrt/evalkit.hpp"

using namespace jrt;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string file_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

EpisodeRecord rec(int id, bool success, float p, float l, int steps) {
  return {id, success, p, l, steps};
}

}  // namespace

TEST_CASE("aggregate closed forms") {
  SUBCASE("all succeed along exactly-shortest paths") {
    EvalReport r;
    for (int i = 0; i < 4; ++i) r.episodes.push_back(rec(i, true, 2.f, 2.f, 8));
    compute_aggregates(r);
    CHECK(r.success_rate == doctest::Approx(100.f));
    CHECK(r.spl == doctest::Approx(100.f));
  }
  SUBCASE("all fail") {
    EvalReport r;
    for (int i = 0; i < 4; ++i) r.episodes.push_back(rec(i, false, 5.f, 2.f, 60));
    compute_aggregates(r);
    CHECK(r.success_rate == 0.f);
    CHECK(r.spl == 0.f);
  }
  SUBCASE("one success at twice the shortest among two episodes") {
    EvalReport r;
    r.episodes.push_back(rec(0, true, 4.f, 2.f, 16));
    r.episodes.push_back(rec(1, false, 1.f, 2.f, 60));
    compute_aggregates(r);
    CHECK(r.success_rate == doctest::Approx(50.f));
    CHECK(r.spl == doctest::Approx(25.f));
  }
  SUBCASE("non-positive shortest length is rejected") {
    EvalReport r;
    r.episodes.push_back(rec(0, true, 1.f, 0.f, 4));
    CHECK_THROWS(compute_aggregates(r));
  }
}

TEST_CASE("SPL identities hold on 200 random reports") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    EvalReport r;
    int n = rng.uniform_int(1, 40);
    for (int i = 0; i < n; ++i) {
      float l = rng.uniformf(0.25f, 10.f);
      float p = rng.uniformf(0.f, 20.f);
      r.episodes.push_back(rec(i, rng.uniform_int(0, 1) == 1, p, l, rng.uniform_int(1, 100)));
    }
    compute_aggregates(r);
    // SPL <= success rate, since each episode's term is at most its indicator
    CHECK(r.spl <= r.success_rate + 1e-9);
    CHECK(r.success_rate >= 0.f);
    CHECK(r.success_rate <= 100.f);
    CHECK(r.spl >= 0.f);

    // recomputing from the same records is exact
    float sr = r.success_rate, sp = r.spl;
    compute_aggregates(r);
    CHECK(r.success_rate == sr);
    CHECK(r.spl == sp);
  }
}

TEST_CASE("episode sets are fixed by seed and sized per house") {
  auto houses = generate_houses(Domain::Synthetic, 4, 11, "test");
  EpisodeSet a = make_episode_set(houses, 10, 12, 80);
  EpisodeSet b = make_episode_set(houses, 10, 12, 80);
  REQUIRE(a.specs.size() == 40);
  REQUIRE(a.house_index.size() == 40);
  for (size_t i = 0; i < a.specs.size(); ++i) {
    CHECK(a.house_index[i] == b.house_index[i]);
    CHECK(a.specs[i].start.x == b.specs[i].start.x);
    CHECK(a.specs[i].start.y == b.specs[i].start.y);
    CHECK(a.specs[i].start.heading_deg == b.specs[i].start.heading_deg);
    CHECK(a.specs[i].goal == b.specs[i].goal);
    CHECK(a.specs[i].max_steps == 80);
  }
  EpisodeSet c = make_episode_set(houses, 10, 13, 80);
  bool differs = false;
  for (size_t i = 0; i < a.specs.size(); ++i)
    differs |= a.specs[i].start.x != c.specs[i].start.x || a.specs[i].goal != c.specs[i].goal;
  CHECK(differs);
}

TEST_CASE("evaluate: deterministic, record invariants hold") {
  auto houses = generate_houses(Domain::Synthetic, 3, 21, "test");
  EpisodeSet set = make_episode_set(houses, 4, 22, 50);
  ParamSet model;
  init_agent_params(model, 23);

  EvalReport a = evaluate(model, set);
  EvalReport b = evaluate(model, set);
  REQUIRE(a.episodes.size() == set.specs.size());
  REQUIRE(b.episodes.size() == a.episodes.size());
  for (size_t i = 0; i < a.episodes.size(); ++i) {
    CHECK(a.episodes[i].success == b.episodes[i].success);
    CHECK(a.episodes[i].path_len == b.episodes[i].path_len);
    CHECK(a.episodes[i].steps == b.episodes[i].steps);
    CHECK(a.episodes[i].episode_id == static_cast<int>(i));
    CHECK(a.episodes[i].path_len >= 0.f);
    CHECK(a.episodes[i].shortest_len > 0.f);
    CHECK(a.episodes[i].steps <= 50);
    // the agent cannot beat the geodesic by more than the cell-discretization slack
    if (a.episodes[i].success)
      CHECK(a.episodes[i].path_len >= a.episodes[i].shortest_len - 0.5f);
  }
  CHECK(a.success_rate == b.success_rate);
  CHECK(a.spl == b.spl);
  CHECK(a.spl <= a.success_rate + 1e-4f);
}

TEST_CASE("report and aggregate CSV round trips") {
  EvalReport r;
  r.episodes.push_back(rec(0, true, 1.25f, 1.f, 5));
  r.episodes.push_back(rec(1, false, 3.5f, 2.f, 60));
  compute_aggregates(r);
  std::string path = temp_path("jrt_eval_report.csv");
  save_eval_report(r, path);
  std::string text = file_text(path);
  CHECK(text == "episode_id,success,path_len,shortest_len,steps\n"
                "0,1,1.2500,1.0000,5\n"
                "1,0,3.5000,2.0000,60\n");
  std::remove(path.c_str());

  std::vector<AggregateRow> rows = {{"sim baseline", 1, 31.25f, 20.5f},
                                    {"sim+FA+PM", 2, 58.5f, 40.25f}};
  std::string agg = temp_path("jrt_eval_agg.csv");
  save_aggregates(rows, agg);
  auto loaded = load_aggregates(agg);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].model == "sim baseline");
  CHECK(loaded[0].seed == 1);
  CHECK(loaded[0].success_rate == doctest::Approx(31.25f));
  CHECK(loaded[1].model == "sim+FA+PM");
  CHECK(loaded[1].spl == doctest::Approx(40.25f));
  std::remove(agg.c_str());
}

TEST_CASE("compare: mean and dispersion across seeds") {
  std::vector<AggregateRow> rows = {{"a", 1, 50.f, 40.f}, {"a", 2, 70.f, 60.f},
                                    {"a", 3, 60.f, 50.f}, {"b", 1, 30.f, 20.f}};
  auto table = compare(rows);
  REQUIRE(table.size() == 2);
  CHECK(table[0].model == "a");
  CHECK(table[0].seeds == 3);
  CHECK(table[0].success_mean == doctest::Approx(60.f));
  CHECK(table[0].success_std == doctest::Approx(std::sqrt(200.f / 3.f)).epsilon(1e-4));
  CHECK(table[0].spl_mean == doctest::Approx(50.f));
  // single seed: zero dispersion
  CHECK(table[1].seeds == 1);
  CHECK(table[1].success_std == 0.f);
  CHECK(table[1].spl_std == 0.f);

  // identical models under two labels agree
  std::vector<AggregateRow> twin = {{"x", 1, 42.f, 33.f}, {"y", 1, 42.f, 33.f}};
  auto twins = compare(twin);
  CHECK(twins[0].success_mean == twins[1].success_mean);
  CHECK(twins[0].spl_mean == twins[1].spl_mean);

  std::string path = temp_path("jrt_compare.csv");
  save_compare(table, path);
  std::string text = file_text(path);
  CHECK(text.rfind("model,seeds,success_mean,success_std,spl_mean,spl_std\n", 0) == 0);
  std::remove(path.c_str());
}

TEST_CASE("heatmap: shape, range, constant-input guard") {
  ParamSet model;
  init_agent_params(model, 31);
  auto houses = generate_houses(Domain::Synthetic, 2, 32, "test");
  auto imgs = sample_images(houses, 4, 33);

  // skip wall close-ups: a spatially constant observation is the guard case below
  size_t structured = 0;
  for (size_t i = 0; i < imgs.size(); ++i) {
    float lo = 1e9f, hi = -1e9f;
    for (int y = 0; y < kImgSize; ++y) {
      float v = imgs[i][y * kImgSize];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > 0.05f) {
      structured = i;
      break;
    }
  }

  Tensor map = heatmap(model, imgs[structured]);
  REQUIRE(map.shape == Shape({6, 6}));
  float lo = 1.f, hi = 0.f;
  for (float v : map.data) {
    CHECK(v >= 0.f);
    CHECK(v <= 1.f);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // a structured observation produces a full-range normalized map
  CHECK(lo == doctest::Approx(0.f));
  CHECK(hi == doctest::Approx(1.f));

  Tensor flat({3, kImgSize, kImgSize});
  for (auto& v : flat.data) v = 0.4f;
  Tensor fm = heatmap(model, flat);
  float flo = 1.f, fhi = 0.f;
  for (float v : fm.data) {
    flo = std::min(flo, v);
    fhi = std::max(fhi, v);
  }
  CHECK(fhi - flo < 0.2f);
}

TEST_CASE("pgm files carry the P5 header and one byte per cell") {
  Tensor map({2, 3}, {0.f, 0.25f, 0.5f, 0.75f, 1.f, 1.f});
  std::string path = temp_path("jrt_heatmap.pgm");
  save_pgm(map, path);
  std::string bytes = file_text(path);
  std::string header = "P5\n3 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  CHECK(bytes.rfind(header, 0) == 0);
  const auto* px = reinterpret_cast<const unsigned char*>(bytes.data() + header.size());
  CHECK(px[0] == 0);
  CHECK(px[1] == 64);
  CHECK(px[2] == 128);
  CHECK(px[3] == 191);
  CHECK(px[4] == 255);
  CHECK(px[5] == 255);
  std::remove(path.c_str());
}
