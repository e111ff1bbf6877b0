#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "jrt/agent.hpp"
#include "jrt/checkpoint.hpp"
#include "jrt/ops.hpp"

using namespace jrt;

namespace {

Tensor random_image(Rng& rng, int batch = 1) {
  Tensor t({batch, 3, kImgSize, kImgSize});
  for (auto& v : t.data) v = rng.uniformf(0.f, 1.f);
  return t;
}

Tensor randn(Shape s, Rng& rng, float scale) {
  Tensor t(std::move(s));
  for (auto& v : t.data) v = rng.normal() * scale;
  return t;
}

// a shrunken agent (feature 8, hidden 8, goal embed 4) keeps finite-difference
// gradient checks cheap while exercising every op in the real architecture
ParamSet mini_agent(Rng& rng) {
  ParamSet ps;
  ps.add("M.conv1.w", randn({2, 3, 4, 4}, rng, 0.2f));
  ps.add("M.conv1.b", randn({2}, rng, 0.1f));
  ps.add("M.conv2.w", randn({3, 2, 4, 4}, rng, 0.2f));
  ps.add("M.conv2.b", randn({3}, rng, 0.1f));
  ps.add("M.fc.w", randn({3 * 6 * 6, 8}, rng, 0.1f));
  ps.add("M.fc.b", randn({8}, rng, 0.1f));
  ps.add("G.emb", randn({kNumRoomTypes, 4}, rng, 0.3f));
  for (const char* g : {"z", "r", "c"}) {
    ps.add(std::string("R.W") + g, randn({8 + 4 + 8, 8}, rng, 0.2f));
    ps.add(std::string("R.b") + g, randn({8}, rng, 0.1f));
  }
  ps.add("P.W", randn({8, kNumActions}, rng, 0.3f));
  ps.add("P.b", randn({kNumActions}, rng, 0.1f));
  ps.add("V.W", randn({8, 1}, rng, 0.3f));
  ps.add("V.b", randn({1}, rng, 0.1f));
  return ps;
}

std::vector<StepRecord> random_traj(Rng& rng, int len) {
  std::vector<StepRecord> traj(static_cast<size_t>(len));
  for (auto& s : traj) {
    Tensor img = random_image(rng);
    s.image = Tensor({3, kImgSize, kImgSize}, img.data);
    s.goal = rng.uniform_int(0, kNumRoomTypes - 1);
    s.action = rng.uniform_int(0, kNumActions - 1);
    s.reward = rng.uniformf(-0.5f, 0.5f);
  }
  return traj;
}

}  // namespace

TEST_CASE("encode: 128 features, deterministic, finite") {
  ParamSet ps;
  init_agent_params(ps, 1);
  Rng rng(2);
  Tensor imgs = random_image(rng, 2);
  Var f1 = encode_graph(ps, imgs);
  Var f2 = encode_graph(ps, imgs);
  CHECK(f1->value.shape == Shape{2, kFeatureDim});
  CHECK(f1->value.all_finite());
  CHECK(f1->value.data == f2->value.data);
  CHECK_THROWS(encode_graph(ps, Tensor::zeros({1, 3, 16, 16})));
}

TEST_CASE("encode gradient passes grad_check") {
  Rng rng(3);
  ParamSet ps = mini_agent(rng);
  Tensor img = random_image(rng);
  double err = grad_check([&](auto& p) { return sum_all(encode_graph(p, img)); }, ps);
  CHECK(err < 1e-3);
}

TEST_CASE("act: valid distribution, deterministic, unknown goal rejected") {
  ParamSet ps;
  init_agent_params(ps, 4);
  Rng rng(5);
  Tensor img({3, kImgSize, kImgSize}, random_image(rng).data);
  Tensor h = zero_hidden();
  ActOut a = act(ps, img, 2, h);
  float sum = a.pi[0] + a.pi[1] + a.pi[2];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  for (int i = 0; i < kNumActions; ++i) CHECK(a.pi[i] > 0.f);
  CHECK(std::isfinite(a.value));
  CHECK(a.h.all_finite());
  ActOut b = act(ps, img, 2, h);
  CHECK(a.pi.data == b.pi.data);
  CHECK(a.h.data == b.h.data);
  CHECK_THROWS_AS(act(ps, img, 7, h), std::invalid_argument);
}

TEST_CASE("5-step unrolled value gradient passes grad_check") {
  Rng rng(7);
  ParamSet ps = mini_agent(rng);
  auto traj = random_traj(rng, 5);
  Tensor h0 = Tensor::zeros({1, 8});
  double err = grad_check(
      [&](auto& p) {
        auto u = unroll_graph(p, traj, h0);
        return reshape(u.steps.back().value, {1});
      },
      ps, 1e-5);  // small eps keeps central differences off leaky-relu kinks
  CHECK(err < 1e-3);
}

TEST_CASE("n-step returns match the brute-force oracle") {
  auto r = nstep_returns({1.f, 0.f, 0.f}, 0.f, 0.99f);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r[1] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(r[2] == doctest::Approx(0.0).epsilon(1e-6));

  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    int n = rng.uniform_int(1, kUnroll);
    std::vector<float> rewards(static_cast<size_t>(n));
    for (auto& v : rewards) v = rng.uniformf(-1.f, 1.f);
    float bootstrap = rng.uniformf(-1.f, 1.f);
    float gamma = 0.99f;
    auto returns = nstep_returns(rewards, bootstrap, gamma);
    for (int t = 0; t < n; ++t) {
      double acc = 0.0;
      for (int k = t; k < n; ++k) acc += std::pow(gamma, k - t) * rewards[static_cast<size_t>(k)];
      acc += std::pow(gamma, n - t) * bootstrap;
      CHECK(returns[static_cast<size_t>(t)] == doctest::Approx(acc).epsilon(1e-5));
    }
  }
}

TEST_CASE("a3c loss is exactly zero when returns equal values and beta is 0") {
  Rng rng(11);
  ParamSet ps = mini_agent(rng);
  auto traj = random_traj(rng, 4);
  Tensor h0 = Tensor::zeros({1, 8});
  auto u = unroll_graph(ps, traj, h0);
  std::vector<float> returns;
  for (const auto& s : u.steps) returns.push_back(s.value->value[0]);
  Var loss = a3c_loss_from(ps, u, traj, returns, advantages_from(u, returns), 0.0);
  CHECK(loss->value[0] == 0.f);
}

TEST_CASE("entropy bonus: loss shifts by -beta * sum H, maximal at uniform") {
  Rng rng(13);
  ParamSet ps = mini_agent(rng);
  auto traj = random_traj(rng, 4);
  Tensor h0 = Tensor::zeros({1, 8});
  auto u = unroll_graph(ps, traj, h0);
  auto returns = nstep_returns({0.1f, 0.2f, -0.1f, 0.3f}, 0.f, 0.99f);
  auto adv = advantages_from(u, returns);
  float l0 = a3c_loss_from(ps, u, traj, returns, adv, 0.0)->value[0];
  float l1 = a3c_loss_from(ps, u, traj, returns, adv, 0.01)->value[0];
  float h_sum = 0.f;
  for (const auto& s : u.steps) h_sum += entropy(Tensor({3}, s.pi->value.data));
  CHECK(l1 - l0 == doctest::Approx(-0.01 * h_sum).epsilon(1e-4));

  Tensor uniform = Tensor::full({3}, 1.f / 3.f);
  CHECK(entropy(uniform) == doctest::Approx(std::log(3.0)).epsilon(1e-6));
  for (int i = 0; i < 50; ++i) {
    Tensor p = softmax(randn({3}, rng, 2.f));
    CHECK(entropy(p) <= entropy(uniform) + 1e-6f);
  }
}

TEST_CASE("stop gradient: policy term alone sends nothing into the value head") {
  Rng rng(15);
  ParamSet ps = mini_agent(rng);
  auto traj = random_traj(rng, 3);
  Tensor h0 = Tensor::zeros({1, 8});
  auto returns = nstep_returns({0.5f, -0.2f, 0.1f}, 0.3f, 0.99f);
  auto u = unroll_graph(ps, traj, h0);
  auto adv = advantages_from(u, returns);

  ps.zero_grad();
  backward(a3c_loss_from(ps, u, traj, returns, adv, 0.0, 0.0));
  for (float g : ps.at("V.W").grad.data) CHECK(g == 0.f);
  CHECK(ps.at("V.b").grad[0] == 0.f);

  ps.zero_grad();
  backward(a3c_loss_from(ps, unroll_graph(ps, traj, h0), traj, returns, adv, 0.0, kValueCoeff));
  bool any = false;
  for (float g : ps.at("V.W").grad.data) any = any || g != 0.f;
  CHECK(any);
}

TEST_CASE("full a3c loss passes grad_check") {
  Rng rng(17);
  ParamSet ps = mini_agent(rng);
  auto traj = random_traj(rng, 3);
  Tensor h0 = randn({1, 8}, rng, 0.1f);
  auto returns = nstep_returns({0.1f, -0.3f, 0.2f}, 0.25f, 0.99f);
  auto adv = advantages_from(unroll_graph(ps, traj, h0), returns);
  double err = grad_check(
      [&](auto& p) { return a3c_loss(p, traj, h0, returns, adv, 0.01); }, ps, 1e-5);
  CHECK(err < 1e-3);
  CHECK_THROWS(a3c_loss(ps, {}, h0, returns, adv, 0.01));
}

TEST_CASE("agent checkpoints round trip under the reserved prefixes") {
  ParamSet ps;
  init_agent_params(ps, 19);
  std::string path = (std::filesystem::temp_directory_path() / "jrt_test_agent.ckpt").string();
  save_checkpoint(ps, path);
  ParamSet loaded = load_checkpoint(path);
  CHECK(loaded.order == ps.order);
  for (const auto& name : ps.order) CHECK(loaded.at(name).value.data == ps.at(name).value.data);
  for (const char* prefix : {"M.", "G.", "R.", "P.", "V."}) {
    bool found = false;
    for (const auto& name : ps.order) found = found || name.rfind(prefix, 0) == 0;
    CHECK(found);
  }
  std::remove(path.c_str());
}
