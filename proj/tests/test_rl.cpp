#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "jrt/checkpoint.hpp"
#include "jrt/rl.hpp"

using namespace jrt;

namespace {

// two 3x3 rooms joined by a fully open shared wall: the easiest possible
// navigation task, used as the trainer's sanity oracle
HousePlan open_house(RoomType a, RoomType b, uint64_t seed) {
  HousePlan h;
  h.width = 9;
  h.height = 5;
  h.grid.assign(45, Cell::Wall);
  h.rooms.push_back({1, 1, 3, 3, a});
  h.rooms.push_back({5, 1, 3, 3, b});
  for (const auto& r : h.rooms)
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x) h.grid[static_cast<size_t>(y) * 9 + x] = Cell::Floor;
  for (int y = 1; y <= 3; ++y) {
    h.grid[static_cast<size_t>(y) * 9 + 4] = Cell::Floor;
    h.doors.push_back({0, 1, 4, y});
  }
  h.seed = seed;
  h.rebuild_room_of();
  return h;
}

std::vector<HousePlan> trivial_houses() {
  return {open_house(RoomType::LivingRoom, RoomType::Kitchen, 1),
          open_house(RoomType::Bedroom, RoomType::Bathroom, 2),
          open_house(RoomType::Kitchen, RoomType::LivingRoom, 3),
          open_house(RoomType::Bathroom, RoomType::Bedroom, 4)};
}

TrainConfig fast_config(uint64_t seed, int steps) {
  TrainConfig cfg;
  cfg.total_steps = steps;
  cfg.seed = seed;
  cfg.max_episode_steps = 60;
  cfg.gamma = 0.95f;
  cfg.entropy_coeff = 0.02f;
  cfg.eval_episodes_per_house = 10;
  return cfg;
}

}  // namespace

TEST_CASE("trivial two-room houses are solved within the sanity budget") {
  auto houses = trivial_houses();
  TrainConfig cfg = fast_config(1, 30000);
  cfg.eval_every = 30000;
  TrainResult r = train_baseline(cfg, houses, houses);
  REQUIRE(!r.log.rows.empty());
  CHECK(r.log.rows.back().success_rate > 90.f);
  CHECK(r.log.rows.back().spl > 0.f);
}

TEST_CASE("fixed seed, single worker: training is bitwise reproducible") {
  auto houses = trivial_houses();
  TrainConfig cfg = fast_config(7, 1500);
  cfg.workers = 1;
  cfg.eval_every = 500;
  TrainResult a = train_baseline(cfg, houses, houses);
  TrainResult b = train_baseline(cfg, houses, houses);
  REQUIRE(a.params.order == b.params.order);
  for (const auto& name : a.params.order)
    CHECK(a.params.at(name).value.data == b.params.at(name).value.data);

  auto tmp = std::filesystem::temp_directory_path();
  std::string ca = (tmp / "jrt_rl_a.ckpt").string(), cb = (tmp / "jrt_rl_b.ckpt").string();
  std::string la = (tmp / "jrt_rl_a.csv").string(), lb = (tmp / "jrt_rl_b.csv").string();
  save_checkpoint(a.params, ca);
  save_checkpoint(b.params, cb);
  save_train_log(a.log, la);
  save_train_log(b.log, lb);
  CHECK(file_bytes(ca) == file_bytes(cb));
  CHECK(file_bytes(la) == file_bytes(lb));
  for (const auto& p : {ca, cb, la, lb}) std::remove(p.c_str());
}

TEST_CASE("four workers stay deterministic under the synchronous schedule") {
  auto houses = trivial_houses();
  TrainConfig cfg = fast_config(9, 1200);
  cfg.workers = 4;
  TrainResult a = train_baseline(cfg, houses, houses);
  TrainResult b = train_baseline(cfg, houses, houses);
  for (const auto& name : a.params.order)
    CHECK(a.params.at(name).value.data == b.params.at(name).value.data);
}

TEST_CASE("finetune: zero steps is the identity, step counter continues") {
  auto houses = trivial_houses();
  TrainConfig cfg = fast_config(11, 800);
  cfg.eval_every = 400;
  TrainResult base = train_baseline(cfg, houses, houses);
  REQUIRE(base.params.has("meta.steps"));
  long base_steps = static_cast<long>(base.params.at("meta.steps").value[0]);
  CHECK(base_steps >= 800);

  TrainConfig zero = cfg;
  zero.total_steps = 0;
  TrainResult same = finetune(base.params, zero, houses, houses);
  for (const auto& name : base.params.order)
    CHECK(same.params.at(name).value.data == base.params.at(name).value.data);

  TrainConfig more = fast_config(12, 800);
  more.eval_every = 400;
  TrainResult ft = finetune(base.params, more, houses, houses);
  REQUIRE(!ft.log.rows.empty());
  for (const auto& row : ft.log.rows) CHECK(row.steps > base_steps);
  long prev = base_steps;
  for (const auto& row : ft.log.rows) {
    CHECK(row.steps > prev);
    prev = row.steps;
  }
  CHECK(static_cast<long>(ft.params.at("meta.steps").value[0]) > base_steps);
}

TEST_CASE("non-finite parameters trip the divergence guard") {
  auto houses = trivial_houses();
  ParamSet bad;
  init_agent_params(bad, 13);
  bad.at("M.fc.w").value[0] = std::nanf("");
  TrainConfig cfg = fast_config(13, 200);
  CHECK_THROWS(finetune(bad, cfg, houses, houses));
}

TEST_CASE("train log CSV layout") {
  TrainLog log;
  log.rows.push_back({1000, -0.5f, 12.5f, 8.25f});
  log.rows.push_back({2000, 0.25f, 50.f, 40.f});
  std::string path = (std::filesystem::temp_directory_path() / "jrt_rl_log.csv").string();
  save_train_log(log, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "steps,mean_reward,success_rate,spl");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  std::remove(path.c_str());
}

TEST_CASE("greedy evaluation is deterministic and bounded") {
  auto houses = trivial_houses();
  ParamSet ps;
  init_agent_params(ps, 17);
  EvalSummary a = eval_greedy(ps, houses, 3, 21, 60);
  EvalSummary b = eval_greedy(ps, houses, 3, 21, 60);
  CHECK(a.success_rate == b.success_rate);
  CHECK(a.spl == b.spl);
  CHECK(a.success_rate >= 0.f);
  CHECK(a.success_rate <= 100.f);
  CHECK(a.spl <= a.success_rate + 1e-4f);
}
